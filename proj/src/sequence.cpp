#include "hygrid/sequence.hpp"

#include <numbers>

#include "hygrid/errors.hpp"
#include "hygrid/powerflow.hpp"

namespace hygrid {

namespace fortescue {

Complex alpha() {
    return std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
}

const Mat3c& matrix() {
    static const Mat3c t = [] {
        const Complex a = alpha();
        const Complex a2 = a * a;
        Mat3c m;
        m << 1.0, 1.0, 1.0,  //
            1.0, a, a2,      //
            1.0, a2, a;
        return Mat3c(m / 3.0);
    }();
    return t;
}

const Mat3c& inverse() {
    static const Mat3c inv = [] {
        const Complex a = alpha();
        const Complex a2 = a * a;
        Mat3c m;
        m << 1.0, 1.0, 1.0,  //
            1.0, a2, a,      //
            1.0, a, a2;
        return m;
    }();
    return inv;
}

}  // namespace fortescue

SequenceTriple to_sequence(const Vec3c& e_abc) {
    const Vec3c s = fortescue::matrix() * e_abc;
    return SequenceTriple{s(0), s(1), s(2)};
}

Vec3c from_sequence(const SequenceTriple& s) {
    return fortescue::inverse() * s.as_vector();
}

SequenceFh sequence_fh(const GridModel& g, const OperatingPoint& op, int i, int n) {
    if (static_cast<int>(op.e_ac.size()) != g.n_ac())
        throw StateError("operating point covers " + std::to_string(op.e_ac.size()) +
                         " AC nodes, grid has " + std::to_string(g.n_ac()));
    if (i < 0 || i >= g.n_ac() || n < 0 || n >= g.n_ac())
        throw StateError("sequence_fh node index out of range");

    const Mat3c& t = fortescue::matrix();
    const Vec3c e_seq = t * op.e_ac[i];

    Vec3c current = Vec3c::Zero();
    for (int k = 0; k < g.n_ac(); ++k) current += g.y_ac_block(i, k) * op.e_ac[k];
    const Vec3c i_seq = t * current;

    SequenceFh out;
    out.f = e_seq.asDiagonal() * t.conjugate() * g.y_ac_block(i, n).conjugate();
    out.h = i_seq.conjugate().asDiagonal() * t;
    return out;
}

}  // namespace hygrid
