#include <doctest.h>

#include <numbers>
#include <random>

#include "hygrid/errors.hpp"
#include "hygrid/powerflow.hpp"
#include "hygrid/sequence.hpp"
#include "support/cases.hpp"

using namespace hygrid;

namespace {

Complex test_alpha() { return std::polar(1.0, 2.0 * std::numbers::pi / 3.0); }

// Independent 3x3 Fortescue product, written longhand.
Vec3c reference_transform(const Vec3c& e) {
    const Complex a = test_alpha();
    const Complex a2 = a * a;
    Vec3c s;
    s(0) = (e(0) + e(1) + e(2)) / 3.0;
    s(1) = (e(0) + a * e(1) + a2 * e(2)) / 3.0;
    s(2) = (e(0) + a2 * e(1) + a * e(2)) / 3.0;
    return s;
}

GridModel two_node_ac(const Mat3c& series, const Mat3c& shunt = Mat3c::Zero()) {
    GridModel g;
    g.ac_nodes = {{"A1", AcRole::Slack}, {"A2", AcRole::PQ}};
    AcBranch br;
    br.from = 0;
    br.to = 1;
    br.series = series;
    br.shunt_from = shunt;
    br.shunt_to = shunt;
    g.ac_branches = {br};
    return finalize_grid(std::move(g));
}

OperatingPoint point_with(const GridModel& g, const std::vector<Vec3c>& e_ac) {
    OperatingPoint op;
    op.e_ac = e_ac;
    op.e_dc = Eigen::VectorXd::Zero(g.n_dc());
    return op;
}

Mat3c circulant(Complex self, Complex mutual) {
    Mat3c m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = r == c ? self : mutual;
    return m;
}

}  // namespace

TEST_CASE("alpha is the counter-clockwise cube root of unity") {
    const Complex a = fortescue::alpha();
    CHECK(std::abs(a * a + a + 1.0) < 1e-15);
    CHECK(a.imag() > 0.0);
}

TEST_CASE("T and its inverse multiply to the identity") {
    const Mat3c product = fortescue::matrix() * fortescue::inverse();
    CHECK((product - Mat3c::Identity()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("to_sequence maps the canonical sets") {
    const Complex a = test_alpha();
    const Complex a2 = a * a;

    const SequenceTriple pos = to_sequence(Vec3c(1.0, a2, a));
    CHECK(std::abs(pos.zero) < 1e-15);
    CHECK(std::abs(pos.positive - 1.0) < 1e-15);
    CHECK(std::abs(pos.negative) < 1e-15);

    const SequenceTriple common = to_sequence(Vec3c(1.0, 1.0, 1.0));
    CHECK(std::abs(common.zero - 1.0) < 1e-15);
    CHECK(std::abs(common.positive) < 1e-15);
    CHECK(std::abs(common.negative) < 1e-15);
}

TEST_CASE("to_sequence matches an independent matrix product on an unbalanced set") {
    const Complex a = test_alpha();
    const Vec3c e(Complex(1.0, 0.0), 0.9 * a * a, 1.1 * a);
    const Vec3c want = reference_transform(e);
    const SequenceTriple got = to_sequence(e);
    CHECK(std::abs(got.zero - want(0)) < 1e-15);
    CHECK(std::abs(got.positive - want(1)) < 1e-15);
    CHECK(std::abs(got.negative - want(2)) < 1e-15);

    const Vec3c back = from_sequence(got);
    CHECK((back - e).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("from_sequence reverses the canonical sets") {
    const Complex a = test_alpha();
    const Vec3c pos = from_sequence(SequenceTriple{0.0, 1.0, 0.0});
    CHECK((pos - Vec3c(1.0, a * a, a)).cwiseAbs().maxCoeff() < 1e-15);
    const Vec3c common = from_sequence(SequenceTriple{1.0, 0.0, 0.0});
    CHECK((common - Vec3c(1.0, 1.0, 1.0)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("round trip and linearity over random phasors") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    auto random_vec = [&] {
        Vec3c v;
        for (int k = 0; k < 3; ++k) v(k) = Complex(dist(rng), dist(rng));
        return v;
    };
    for (int trial = 0; trial < 50; ++trial) {
        const Vec3c x = random_vec();
        const Vec3c y = random_vec();
        const Complex ca(dist(rng), dist(rng));
        const Complex cb(dist(rng), dist(rng));

        CHECK((from_sequence(to_sequence(x)) - x).cwiseAbs().maxCoeff() < 1e-12);

        const Vec3c lhs = (fortescue::matrix() * (ca * x + cb * y)).eval();
        const Vec3c rhs = ca * to_sequence(x).as_vector() + cb * to_sequence(y).as_vector();
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("sequence_fh: zero row sums give a vanishing H on a flat balanced profile") {
    const GridModel g = two_node_ac(circulant({4.0, -8.0}, {-1.0, 2.0}));
    const Vec3c flat = balanced_unit_voltage();
    const OperatingPoint op = point_with(g, {flat, flat});
    for (int i = 0; i < 2; ++i) {
        const SequenceFh fh = sequence_fh(g, op, i, i);
        CHECK(fh.h.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("sequence_fh: diagonal self-block against a direct matrix product") {
    const Complex y(3.0, -9.0);
    const GridModel g = two_node_ac(Mat3c(y * Mat3c::Identity()));
    const Vec3c e1 = balanced_unit_voltage();
    const OperatingPoint op = point_with(g, {balanced_unit_voltage(), e1});

    const SequenceFh fh = sequence_fh(g, op, 1, 1);

    // Direct product with a locally built transform: diag(T e) conj(T) conj(Y).
    const Complex a = test_alpha();
    Mat3c t;
    t << 1.0, 1.0, 1.0, 1.0, a, a * a, 1.0, a * a, a;
    t /= 3.0;
    const Mat3c y_block = y * Mat3c::Identity();
    const Mat3c want = Vec3c(t * e1).asDiagonal() * t.conjugate() * y_block.conjugate();
    CHECK((fh.f - want).cwiseAbs().maxCoeff() < 1e-14);

    // Only the positive-sequence row survives for a balanced voltage set, and it is
    // conj(y) * e+ * conj(T) row-wise.
    CHECK(fh.f.row(fortescue::kZero).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(fh.f.row(fortescue::kNegative).cwiseAbs().maxCoeff() < 1e-14);
    const Eigen::RowVector3cd pos_row =
        std::conj(y) * t.conjugate().row(fortescue::kPositive);
    CHECK((fh.f.row(fortescue::kPositive) - pos_row).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("sequence_fh: circulant blocks decouple the sequences, non-circulant do not") {
    const Mat3c series = circulant({2.0, -6.0}, {-0.5, 1.5});
    const GridModel g = two_node_ac(series);
    const Vec3c flat = balanced_unit_voltage();
    const OperatingPoint op = point_with(g, {flat, 1.02 * flat});

    // Express F against sequence-domain perturbations: F * conj(T^{-1}) must be
    // diagonal exactly when the block is circulant.
    auto seq_coupling = [&](const Mat3c& f) {
        const Mat3c coupled = f * fortescue::inverse().conjugate();
        Mat3c off = coupled;
        off.diagonal().setZero();
        return off.cwiseAbs().maxCoeff() / coupled.cwiseAbs().maxCoeff();
    };

    const SequenceFh fh = sequence_fh(g, op, 1, 1);
    CHECK(seq_coupling(fh.f) < 1e-13);

    Mat3c skew = series;
    skew(0, 1) *= 1.5;  // break the circulant symmetry
    skew(1, 0) *= 1.5;
    const GridModel g2 = two_node_ac(skew);
    const SequenceFh fh2 = sequence_fh(g2, op, 1, 1);
    CHECK(seq_coupling(fh2.f) > 1e-3);
}

TEST_CASE("sequence_fh rejects a mismatched operating point") {
    const GridModel g = two_node_ac(circulant({4.0, -8.0}, {-1.0, 2.0}));
    OperatingPoint op;
    op.e_ac = {balanced_unit_voltage()};  // one node missing
    op.e_dc = Eigen::VectorXd::Zero(0);
    CHECK_THROWS_AS(sequence_fh(g, op, 0, 1), StateError);
}
