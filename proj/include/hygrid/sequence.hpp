#pragma once

#include "hygrid/types.hpp"

namespace hygrid {

struct GridModel;
struct OperatingPoint;

/// Symmetrical-component machinery. Row order of every sequence-domain quantity is
/// (zero, positive, negative).
namespace fortescue {

inline constexpr int kZero = 0;
inline constexpr int kPositive = 1;
inline constexpr int kNegative = 2;

/// alpha = e^{j 2pi/3} (counter-clockwise rotation).
Complex alpha();

/// T = (1/3) [[1,1,1],[1,a,a^2],[1,a^2,a]].
const Mat3c& matrix();

/// T^{-1} = [[1,1,1],[1,a^2,a],[1,a,a^2]].
const Mat3c& inverse();

}  // namespace fortescue

struct SequenceTriple {
    Complex zero{0.0, 0.0};
    Complex positive{0.0, 0.0};
    Complex negative{0.0, 0.0};

    Vec3c as_vector() const { return Vec3c(zero, positive, negative); }
};

SequenceTriple to_sequence(const Vec3c& e_abc);
Vec3c from_sequence(const SequenceTriple& s);

/// Sequence-domain linearization coefficients for the power at AC node i.
/// With s = diag(E012_i) * conj(I012_i) the sequence power vector,
///   ds/dx = h_seq * dE_abc_i/dx + sum_n f_seq(i,n) * d(conj(E_abc_n))/dx,
/// where f_seq(i,n) = diag(E012_i) * conj(T) * conj(Y_{i,n}) and
/// h_seq(i) = diag(conj(I012_i)) * T. Rows are addressed as (zero, positive, negative).
struct SequenceFh {
    Mat3c f;  // coefficients of node n's conjugated phase-domain derivative
    Mat3c h;  // coefficients of node i's own phase-domain derivative
};

/// Computes (F_seq(i,n), H_seq(i)) from the operating-point voltages.
/// Throws StateError if the operating point does not cover all AC nodes.
SequenceFh sequence_fh(const GridModel& g, const OperatingPoint& op, int i, int n);

}  // namespace hygrid
