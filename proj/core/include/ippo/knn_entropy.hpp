#pragma once

#include <span>

namespace ippo {

/// Digamma at a positive integer.
double digamma_int(int n);

/// Log volume of the unit ball in R^m.
double log_unit_ball_volume(int m);

/// Kozachenko-Leonenko k-nearest-neighbour differential entropy estimate in
/// nats. `samples` holds N points of dimension `dim`, row-major.
/// Coincident neighbours are floored at distance 1e-12.
double knn_entropy_estimate(std::span<const double> samples, int dim, int k);

}  // namespace ippo
