#include "psfm/geometry/bundle_adjustment.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>

namespace psfm {
namespace {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

struct ProblemCamera {
  image_t image_id;
  RegisteredImage* image;
  int var_index = -1;
  std::array<bool, 6> active{true, true, true, true, true, true};
};

struct ProblemPoint {
  ScenePoint* point;
  int var_index = -1;
};

struct ProblemObservation {
  int camera;
  int point;
  Eigen::Vector2d xy;
};

class BundleProblem {
 public:
  BundleProblem(Reconstruction& recon, const BaOptions& options) {
    Build(recon, options);
  }

  std::size_t NumResiduals() const { return observations_.size(); }
  std::size_t NumVariableCameras() const { return num_var_cameras_; }
  std::size_t NumVariablePoints() const { return num_var_points_; }

  // Cost and mean error at the given (candidate) parameters. Returns +inf if
  // any point ends up behind a camera.
  double Cost(const std::vector<CameraPose>& poses,
              const std::vector<Point3>& xyz, double* mean_error) const {
    double cost = 0.0;
    double sum_norm = 0.0;
    for (const auto& obs : observations_) {
      const auto& cam = cameras_[obs.camera];
      const auto err = SquaredReprojectionError(
          cam.image->intrinsics, poses[obs.camera], xyz[obs.point], obs.xy);
      if (!err) return std::numeric_limits<double>::infinity();
      cost += *err;
      sum_norm += std::sqrt(*err);
    }
    if (mean_error != nullptr) {
      *mean_error = observations_.empty()
                        ? 0.0
                        : sum_norm / static_cast<double>(observations_.size());
    }
    return cost;
  }

  std::vector<CameraPose> CurrentPoses() const {
    std::vector<CameraPose> poses;
    poses.reserve(cameras_.size());
    for (const auto& cam : cameras_) poses.push_back(cam.image->pose);
    return poses;
  }

  std::vector<Point3> CurrentPoints() const {
    std::vector<Point3> xyz;
    xyz.reserve(points_.size());
    for (const auto& p : points_) xyz.push_back(p.point->xyz);
    return xyz;
  }

  void Store(const std::vector<CameraPose>& poses,
             const std::vector<Point3>& xyz) {
    for (std::size_t i = 0; i < cameras_.size(); ++i) {
      if (cameras_[i].var_index >= 0) cameras_[i].image->pose = poses[i];
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i].var_index >= 0) points_[i].point->xyz = xyz[i];
    }
  }

  // Linearizes at (poses, xyz) and accumulates the normal-equation blocks.
  void Linearize(const std::vector<CameraPose>& poses,
                 const std::vector<Point3>& xyz) {
    u_.assign(num_var_cameras_, Mat6::Zero());
    gc_.assign(num_var_cameras_, Vec6::Zero());
    v_.assign(num_var_points_, Eigen::Matrix3d::Zero());
    gp_.assign(num_var_points_, Eigen::Vector3d::Zero());
    for (auto& w : w_) w.second.setZero();

    Eigen::Vector2d r;
    Eigen::Matrix<double, 2, 6> jc;
    Eigen::Matrix<double, 2, 3> jp;
    for (std::size_t k = 0; k < observations_.size(); ++k) {
      const auto& obs = observations_[k];
      const auto& cam = cameras_[obs.camera];
      const int ci = cam.var_index;
      const int pi = points_[obs.point].var_index;
      if (!ComputeReprojectionJacobian(cam.image->intrinsics,
                                       poses[obs.camera], xyz[obs.point],
                                       obs.xy, &r, &jc, &jp)) {
        continue;
      }
      if (ci >= 0) {
        for (int c = 0; c < 6; ++c) {
          if (!cam.active[c]) jc.col(c).setZero();
        }
        u_[ci].noalias() += jc.transpose() * jc;
        gc_[ci].noalias() += jc.transpose() * r;
      }
      if (pi >= 0) {
        v_[pi].noalias() += jp.transpose() * jp;
        gp_[pi].noalias() += jp.transpose() * r;
      }
      if (ci >= 0 && pi >= 0) {
        w_[obs_to_w_[k]].second.noalias() = jc.transpose() * jp;
      }
    }
  }

  double MaxGradient() const {
    double g = 0.0;
    for (const auto& v : gc_) g = std::max(g, v.cwiseAbs().maxCoeff());
    for (const auto& v : gp_) g = std::max(g, v.cwiseAbs().maxCoeff());
    return g;
  }

  // Solves the damped system. Returns false if the reduced system is not
  // positive definite.
  bool Solve(double lambda, std::vector<Vec6>* dc,
             std::vector<Eigen::Vector3d>* dp) const {
    const int nc = static_cast<int>(num_var_cameras_);
    const int dim = 6 * nc;
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    for (int c = 0; c < nc; ++c) {
      Mat6 block = u_[c];
      for (int d = 0; d < 6; ++d) {
        block(d, d) += lambda * std::max(block(d, d), 1e-9);
      }
      s.block<6, 6>(6 * c, 6 * c) = block;
      rhs.segment<6>(6 * c) = -gc_[c];
    }

    std::vector<Eigen::Matrix3d> v_inv(num_var_points_);
    for (std::size_t p = 0; p < num_var_points_; ++p) {
      Eigen::Matrix3d block = v_[p];
      for (int d = 0; d < 3; ++d) {
        block(d, d) += lambda * std::max(block(d, d), 1e-9);
      }
      v_inv[p] = block.inverse();
      if (!v_inv[p].allFinite()) return false;
    }

    for (std::size_t p = 0; p < num_var_points_; ++p) {
      const auto& ws = point_w_[p];
      const Eigen::Matrix3d& vi = v_inv[p];
      const Eigen::Vector3d vig = vi * gp_[p];
      for (std::size_t a = 0; a < ws.size(); ++a) {
        const auto& [ca, wa_idx] = ws[a];
        const Mat63 wa_vi = w_[wa_idx].second * vi;
        rhs.segment<6>(6 * ca).noalias() += w_[wa_idx].second * vig;
        for (std::size_t b = a; b < ws.size(); ++b) {
          const auto& [cb, wb_idx] = ws[b];
          const Mat6 blk = wa_vi * w_[wb_idx].second.transpose();
          s.block<6, 6>(6 * ca, 6 * cb) -= blk;
          if (ca != cb) s.block<6, 6>(6 * cb, 6 * ca) -= blk.transpose();
        }
      }
    }

    for (int c = 0; c < nc; ++c) {
      const auto& cam = cameras_[var_cameras_[c]];
      for (int d = 0; d < 6; ++d) {
        if (!cam.active[d]) {
          s.row(6 * c + d).setZero();
          s.col(6 * c + d).setZero();
          s(6 * c + d, 6 * c + d) = 1.0;
          rhs(6 * c + d) = 0.0;
        }
      }
    }

    Eigen::VectorXd x;
    if (dim > 0) {
      Eigen::LLT<Eigen::MatrixXd> llt(s);
      if (llt.info() != Eigen::Success) return false;
      x = llt.solve(rhs);
      if (!x.allFinite()) return false;
    }

    dc->assign(nc, Vec6::Zero());
    for (int c = 0; c < nc; ++c) (*dc)[c] = x.segment<6>(6 * c);
    dp->assign(num_var_points_, Eigen::Vector3d::Zero());
    for (std::size_t p = 0; p < num_var_points_; ++p) {
      Eigen::Vector3d b = -gp_[p];
      for (const auto& [c, w_idx] : point_w_[p]) {
        b.noalias() -= w_[w_idx].second.transpose() * (*dc)[c];
      }
      (*dp)[p] = v_inv[p] * b;
    }
    return true;
  }

  void ApplyStep(const std::vector<Vec6>& dc,
                 const std::vector<Eigen::Vector3d>& dp,
                 std::vector<CameraPose>* poses,
                 std::vector<Point3>* xyz) const {
    for (std::size_t i = 0; i < cameras_.size(); ++i) {
      const int ci = cameras_[i].var_index;
      if (ci >= 0) (*poses)[i] = UpdatePose((*poses)[i], dc[ci]);
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const int pi = points_[i].var_index;
      if (pi >= 0) (*xyz)[i] += dp[pi];
    }
  }

  double ParameterNorm(const std::vector<CameraPose>& poses,
                       const std::vector<Point3>& xyz) const {
    double sq = 0.0;
    for (std::size_t i = 0; i < cameras_.size(); ++i) {
      if (cameras_[i].var_index >= 0) sq += poses[i].translation.squaredNorm();
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i].var_index >= 0) sq += xyz[i].squaredNorm();
    }
    return std::sqrt(sq);
  }

 private:
  void Build(Reconstruction& recon, const BaOptions& options) {
    std::map<image_t, int> camera_index;
    for (auto& [point_id, point] : recon.points) {
      if (options.point_subset && !options.point_subset->count(point_id)) {
        continue;
      }
      const int point_index = static_cast<int>(points_.size());
      bool has_obs = false;
      for (const auto& obs : point.observations) {
        auto image_it = recon.images.find(obs.image_id);
        if (image_it == recon.images.end()) continue;
        const Eigen::Vector3d cam_xyz = image_it->second.pose.Transform(point.xyz);
        if (!(cam_xyz.z() > 1e-12)) continue;
        auto [it, inserted] = camera_index.emplace(
            obs.image_id, static_cast<int>(cameras_.size()));
        if (inserted) {
          cameras_.push_back(ProblemCamera{obs.image_id, &image_it->second});
        }
        observations_.push_back(ProblemObservation{it->second, point_index,
                                                   obs.xy});
        has_obs = true;
      }
      if (has_obs) {
        points_.push_back(ProblemPoint{&point, -1});
        if (!options.fixed_point_ids.count(point_id)) {
          points_.back().var_index = static_cast<int>(num_var_points_++);
        }
      }
    }

    // Gauge: first camera in registration order, then a scale pin.
    std::set<image_t> fixed = options.fixed_image_ids;
    bool pin_scale = false;
    if (options.fix_gauge && options.fixed_point_ids.size() < 3) {
      std::size_t fixed_in_problem = 0;
      for (const auto& cam : cameras_) fixed_in_problem += fixed.count(cam.image_id);
      if (fixed_in_problem == 0) {
        for (image_t id : recon.registered_order) {
          if (camera_index.count(id)) {
            fixed.insert(id);
            fixed_in_problem = 1;
            break;
          }
        }
      }
      pin_scale = fixed_in_problem == 1;
    }

    std::vector<int> order;
    for (image_t id : recon.registered_order) {
      auto it = camera_index.find(id);
      if (it != camera_index.end()) order.push_back(it->second);
    }
    // Cameras missing from the registration order still get indexed.
    for (int i = 0; i < static_cast<int>(cameras_.size()); ++i) {
      if (std::find(order.begin(), order.end(), i) == order.end()) {
        order.push_back(i);
      }
    }
    for (int i : order) {
      auto& cam = cameras_[i];
      if (fixed.count(cam.image_id)) continue;
      cam.var_index = static_cast<int>(var_cameras_.size());
      var_cameras_.push_back(i);
      if (pin_scale) {
        int axis = 0;
        cam.image->pose.translation.cwiseAbs().maxCoeff(&axis);
        cam.active[3 + axis] = false;
        pin_scale = false;
      }
    }
    num_var_cameras_ = var_cameras_.size();

    point_w_.assign(num_var_points_, {});
    obs_to_w_.assign(observations_.size(), -1);
    for (std::size_t k = 0; k < observations_.size(); ++k) {
      const int ci = cameras_[observations_[k].camera].var_index;
      const int pi = points_[observations_[k].point].var_index;
      if (ci < 0 || pi < 0) continue;
      obs_to_w_[k] = static_cast<int>(w_.size());
      point_w_[pi].emplace_back(ci, static_cast<int>(w_.size()));
      w_.emplace_back(ci, Mat63::Zero());
    }
  }

  std::vector<ProblemCamera> cameras_;
  std::vector<ProblemPoint> points_;
  std::vector<ProblemObservation> observations_;
  std::vector<int> var_cameras_;
  std::size_t num_var_cameras_ = 0;
  std::size_t num_var_points_ = 0;

  std::vector<Mat6> u_;
  std::vector<Vec6> gc_;
  std::vector<Eigen::Matrix3d> v_;
  std::vector<Eigen::Vector3d> gp_;
  // Camera-point coupling blocks, one per observation with both sides free.
  std::vector<std::pair<int, Mat63>> w_;
  std::vector<std::vector<std::pair<int, int>>> point_w_;
  std::vector<int> obs_to_w_;
};

}  // namespace

bool ComputeReprojectionJacobian(const CameraIntrinsics& intr,
                                 const CameraPose& pose, const Point3& point,
                                 const Eigen::Vector2d& observed,
                                 Eigen::Vector2d* residual,
                                 Eigen::Matrix<double, 2, 6>* jac_pose,
                                 Eigen::Matrix<double, 2, 3>* jac_point) {
  const Eigen::Vector3d rotated = pose.rotation * point;
  const Eigen::Vector3d cam = rotated + pose.translation;
  if (!(cam.z() > 0)) return false;
  const double inv_z = 1.0 / cam.z();
  const double x = cam.x() * inv_z;
  const double y = cam.y() * inv_z;
  *residual = Eigen::Vector2d(intr.focal_x * x + intr.principal_x,
                              intr.focal_y * y + intr.principal_y) -
              observed;
  Eigen::Matrix<double, 2, 3> d_proj;
  d_proj << intr.focal_x * inv_z, 0, -intr.focal_x * x * inv_z, 0,
      intr.focal_y * inv_z, -intr.focal_y * y * inv_z;
  if (jac_pose != nullptr) {
    jac_pose->leftCols<3>() = -d_proj * SkewSymmetric(rotated);
    jac_pose->rightCols<3>() = d_proj;
  }
  if (jac_point != nullptr) {
    *jac_point = d_proj * pose.rotation;
  }
  return true;
}

CameraPose UpdatePose(const CameraPose& pose,
                      const Eigen::Matrix<double, 6, 1>& delta) {
  CameraPose out;
  out.rotation = AngleAxisToRotation(delta.head<3>()) * pose.rotation;
  out.translation = pose.translation + delta.tail<3>();
  return out;
}

BaReport BundleAdjust(Reconstruction& recon, const BaOptions& options) {
  BaReport report;
  BundleProblem problem(recon, options);
  report.num_residuals = problem.NumResiduals();
  report.num_variable_images = problem.NumVariableCameras();
  report.num_variable_points = problem.NumVariablePoints();

  std::vector<CameraPose> poses = problem.CurrentPoses();
  std::vector<Point3> xyz = problem.CurrentPoints();
  double mean_error = 0.0;
  double cost = problem.Cost(poses, xyz, &mean_error);
  report.initial_cost = report.final_cost = cost;
  report.initial_mean_error = report.final_mean_error = mean_error;
  if (report.num_residuals == 0 ||
      (report.num_variable_images == 0 && report.num_variable_points == 0)) {
    report.converged = true;
    return report;
  }

  double lambda = options.initial_lambda;
  bool need_linearize = true;
  std::vector<Vec6> dc;
  std::vector<Eigen::Vector3d> dp;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (need_linearize) {
      problem.Linearize(poses, xyz);
      need_linearize = false;
      if (problem.MaxGradient() <= options.gradient_tolerance) {
        report.converged = true;
        break;
      }
    }
    report.iterations = iter + 1;

    if (!problem.Solve(lambda, &dc, &dp)) {
      lambda *= 10;
      if (lambda > 1e16) break;
      continue;
    }

    double step_sq = 0.0;
    for (const auto& d : dc) step_sq += d.squaredNorm();
    for (const auto& d : dp) step_sq += d.squaredNorm();
    const double step_norm = std::sqrt(step_sq);
    const double x_norm = problem.ParameterNorm(poses, xyz);
    if (step_norm <= options.parameter_tolerance *
                         (x_norm + options.parameter_tolerance)) {
      report.converged = true;
      break;
    }

    std::vector<CameraPose> new_poses = poses;
    std::vector<Point3> new_xyz = xyz;
    problem.ApplyStep(dc, dp, &new_poses, &new_xyz);
    double new_mean = 0.0;
    const double new_cost = problem.Cost(new_poses, new_xyz, &new_mean);

    if (new_cost < cost) {
      const double decrease = cost - new_cost;
      poses = std::move(new_poses);
      xyz = std::move(new_xyz);
      cost = new_cost;
      mean_error = new_mean;
      ++report.accepted_steps;
      lambda = std::max(lambda / 10.0, 1e-12);
      need_linearize = true;
      if (decrease <= options.function_tolerance * (cost + decrease)) {
        report.converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e16) {
        // No descent direction is left at machine precision.
        report.converged = true;
        break;
      }
    }
  }

  problem.Store(poses, xyz);
  report.final_cost = cost;
  report.final_mean_error = mean_error;
  return report;
}

}  // namespace psfm
