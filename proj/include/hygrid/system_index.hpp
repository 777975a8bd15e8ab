#pragma once

#include <vector>

#include "hygrid/grid_model.hpp"

namespace hygrid {

/// Index map between (node, phase, real/imag) coordinates and the stacked real vector
/// shared by the power-flow state, its residuals/Jacobian and the sensitivity system.
///
/// Column layout: [ E' of all non-slack AC nodes (3 per node) |
///                  E'' of all non-slack AC nodes             |
///                  E of all DC nodes ]
/// Converter AC terminals live inside the AC blocks (they are AC nodes); converter DC
/// terminals inside the DC block.
///
/// Row layout: one block of 6 rows per non-slack AC node, then one row per DC node.
/// Per-node row meaning depends on the role:
///   PQ:  [P(a) P(b) P(c) Q(a) Q(b) Q(c)]
///   PV:  [P(a) P(b) P(c) |E|(a) |E|(b) |E|(c)]
///   IC:  [P+/balance, Q+, zero-seq', zero-seq'', neg-seq' or P-, neg-seq'' or Q-]
/// DC node rows: power row (P nodes, PQ-mode converter terminals) or identity row
/// (V nodes, VdcQ-mode converter terminals).
struct SystemIndex {
    int n_ac = 0;
    int n_dc = 0;
    int slack = -1;                // -1 when the grid has no AC nodes
    int n_free = 0;                // non-slack AC node count
    std::vector<int> ac_position;  // ac node -> 0..n_free-1, or -1 for the slack

    static SystemIndex of(const GridModel& g);

    int size() const { return 6 * n_free + n_dc; }

    bool is_slack(int i) const { return i == slack; }

    int col_re(int i, int ph) const { return 3 * ac_position[i] + ph; }
    int col_im(int i, int ph) const { return 3 * n_free + 3 * ac_position[i] + ph; }
    int col_dc(int j) const { return 6 * n_free + j; }

    int row_ac(int i, int k) const { return 6 * ac_position[i] + k; }
    int row_dc(int j) const { return 6 * n_free + j; }
};

}  // namespace hygrid
