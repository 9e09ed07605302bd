#pragma once

#include <vector>

#include <Eigen/Core>

#include "tslab/bandit.hpp"

namespace tslab {

// Builds a Gaussian problem with M models and M actions in which model j
// prescribes action j and the vertex drift of model j equals targets[j].
//
// Column a of the mean matrix is c_a + delta_k(a), with the reference model
// sitting at c_a and the true mean at c_a + h_a, |h_a| = offset. delta_k(a) is
// the root of delta^2/2 - h_a delta + d_k = 0 closest to zero, which exists
// when offset^2 >= 2 max|d|. The offsets c_a are found by Bellman-Ford on
// the difference constraints that make each row's own column its strict
// argmax with at least `margin` to spare. Throws WrongShape when no such
// offsets exist.
BanditProblem realize_vertex_drifts(const std::vector<Eigen::VectorXd>& targets, double offset = 1.0,
                                    double margin = 1e-3);

}  // namespace tslab
