#pragma once

#include "vpsal/fixations.hpp"
#include "vpsal/raster.hpp"

namespace vpsal {

/// Unit impulses at the rounded fixation pixels blurred by an isotropic
/// Gaussian (std `sigma_fix`, truncated at 4 sigma), min-max normalized.
ScalarMap density_map(const FixationSet& fix, int width, int height, double sigma_fix = 10.0);

/// AUC-Judd. Positives are the map values under each fixation (rounded to a
/// pixel, duplicates kept); negatives are every pixel no fixation hits.
/// Exact Mann-Whitney statistic with ties counted as one half.
double auc(const ScalarMap& salmap, const FixationSet& fix);

/// Mean z-score of the map at the fixations (population std, bilinear
/// sampling at real coordinates).
double nss(const ScalarMap& salmap, const FixationSet& fix);

/// Pearson correlation over all pixels.
double cc(const ScalarMap& a, const ScalarMap& b);

}  // namespace vpsal
