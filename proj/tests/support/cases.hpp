#pragma once

#include <filesystem>
#include <random>

#include "hygrid/grid_model.hpp"

namespace hygrid::testing {

std::filesystem::path case_path(const std::string& name);

/// 2-node DC micro grid: node 0 regulates 1.0 p.u., node 1 is a P node,
/// one branch with conductance 10 p.u.
GridModel two_node_dc(double p2 = 0.0);

/// Radial AC-only feeder: slack + 3 PQ + 1 PV, circulant branches, light load.
GridModel ac_only_feeder();

/// Smallest hybrid: slack - PQ - IC AC terminal; DC terminal + one extra DC node.
/// VdcQ mode pairs the terminal with a P node; PQ mode adds a V node for regulation.
GridModel minimal_hybrid(IcMode mode, bool unbalanced = false,
                         bool negative_sequence = false);

/// Grid plus a warm start sitting on the intended solution sheet of the
/// negative-sequence power surface. The converter's P-/Q- targets are the powers
/// realized at a displaced terminal voltage, so the case is feasible by construction.
struct NegativeSequenceCase {
    GridModel grid;
    Eigen::VectorXd init;
};
NegativeSequenceCase negative_sequence_case(double displacement = 2e-3);

/// Uniformly random small case for property suites: 2-6 AC nodes, 2-4 DC nodes,
/// 1-2 converters, random radial topologies and modest setpoints.
GridModel random_small_case(std::mt19937& rng);

/// Copy of g with every P/Q setpoint scaled by (1 + eps * U[-1,1]) and voltage
/// setpoints nudged by up to eps/10.
GridModel randomize_setpoints(GridModel g, std::mt19937& rng, double eps);

}  // namespace hygrid::testing
