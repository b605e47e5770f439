#pragma once

#include <iosfwd>
#include <string>

#include "psfm/geometry/reconstruction.h"
#include "psfm/matchgraph/dataset.h"

namespace psfm {

// Text format, one record per line, cameras in registration order and
// points by id:
//
//   CAMERA image_id qw qx qy qz tx ty tz
//   POINT point_id x y z n_obs image_id kp_idx [image_id kp_idx ...]
//
// Quaternion and translation describe the world-to-camera pose. Doubles are
// written in shortest round-trip form, so equal reconstructions give
// byte-identical files. Reading converts quaternions back to matrices, which
// may move rotation entries by a few ulps.
void WriteReconstruction(const Reconstruction& recon, std::ostream& out);
void WriteReconstruction(const Reconstruction& recon, const std::string& path);

// Intrinsics and observation pixels are taken from the dataset. Observations
// without a keypoint are written with index -1 and read back with a zero
// pixel.
Reconstruction ParseReconstruction(std::istream& in, const Dataset& dataset);
Reconstruction ReadReconstruction(const std::string& path,
                                  const Dataset& dataset);

}  // namespace psfm
