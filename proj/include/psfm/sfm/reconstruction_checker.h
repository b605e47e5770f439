#pragma once

#include <string>
#include <vector>

#include "psfm/geometry/reconstruction.h"

namespace psfm {

// Violations of the reconstruction invariants, empty if consistent:
// registered_order lists exactly the registered images once each; every
// observation references a registered image; every point has at least two
// observations and at most one per image; no keypoint backs two points;
// rotations are orthonormal with det +1 (1e-9); mean reprojection error is
// finite.
std::vector<std::string> CheckReconstruction(const Reconstruction& recon);

}  // namespace psfm
