#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace precis {

struct DivergenceMetrics {
    double cosine = 0;
    double l2_distance = 0;
    double l2_relative_distance = 0;  // normalized by the second argument
};

// How far two gradients of the same loss disagree. The relative distance is
// normalized by g_ref, so the metric is not symmetric in its arguments.
DivergenceMetrics gradient_divergence_metrics(const std::vector<double>& g,
                                              const std::vector<double>& g_ref);

// fraction of coordinates bit-identical before/after a step (tolerances would
// hide updates that genuinely underflowed to zero)
double stagnation_fraction(const std::vector<double>& before, const std::vector<double>& after);

struct LandscapeSlice {
    double half_width = 1.0;
    int resolution = 51;
    std::vector<double> xs;        // grid coordinates, xs[mid] == 0 exactly
    std::vector<double> delta, eta;
    std::vector<double> loss;      // resolution x resolution, row-major in y
    std::vector<std::uint8_t> nan_mask;
    double center_loss = 0;

    double at(int iy, int ix) const { return loss[std::size_t(iy) * std::size_t(resolution) + std::size_t(ix)]; }
};

// f(x, y) = loss_fn(theta + x delta + y eta) on a symmetric grid. Directions
// are Gaussian draws from the seed, then filter-normalized: each group's block
// is rescaled to the norm of the matching block of theta (zero-norm blocks get
// a zero direction). The same seed always yields the same raw draw; the
// normalization depends on the theta it is scaled against. The center sample
// passes theta through untouched, so f(0,0) equals loss_fn(theta) bit-exactly.
// Non-finite losses are data, flagged in nan_mask.
LandscapeSlice landscape_slice(const std::function<double(const std::vector<double>&)>& loss_fn,
                               const std::vector<double>& theta,
                               const std::vector<std::vector<std::size_t>>& groups,
                               std::uint64_t seed, double half_width = 1.0, int resolution = 51);

}  // namespace precis
