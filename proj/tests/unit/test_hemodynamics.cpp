#include "hico/dmf.hpp"
#include "hico/hemodynamics.hpp"

#include <doctest.h>

#include <cmath>

using namespace hico;

namespace {

// Closed-form equilibrium of the balloon model under constant input z.
double plateau_bold(double z, const HemoConstants& c) {
  const double f = 1.0 + z / c.gamma_h;
  const double v = std::pow(f, c.alpha);
  const double e_f = 1.0 - std::pow(1.0 - c.rho, 1.0 / f);
  const double q = v * e_f / c.rho;
  return c.V0 * (c.k1 * (1.0 - q) + c.k2 * (1.0 - q / v) + c.k3 * (1.0 - v));
}

}  // namespace

TEST_CASE("zero input from rest gives zero BOLD") {
  const Matrix z = Matrix::Zero(6000, 3);
  const Matrix bold = bold_transform(z, 10.0, 720.0);
  CHECK(bold.rows() == 83);
  CHECK(bold.cols() == 3);
  CHECK(bold.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("output length is floor(samples * dt / tr)") {
  CHECK(bold_transform(Matrix::Zero(6000, 1), 10.0, 720.0).rows() == 83);
  CHECK(bold_transform(Matrix::Zero(30000, 1), 10.0, 720.0).rows() == 416);
  CHECK(bold_transform(Matrix::Zero(200, 1), 10.0, 2000.0).rows() == 1);
  CHECK(bold_transform(Matrix::Zero(72, 1), 10.0, 720.0).rows() == 1);
  CHECK(bold_transform(Matrix::Zero(71, 1), 10.0, 720.0).rows() == 0);
}

TEST_CASE("constant input settles to the closed-form plateau") {
  const HemoConstants c;
  for (const double z : {0.05, 0.2, 0.5}) {
    const Matrix in = Matrix::Constant(120'000, 1, z);  // 1200 s
    const Matrix bold = bold_transform(in, 10.0, 720.0);
    CHECK(bold(bold.rows() - 1, 0) == doctest::Approx(plateau_bold(z, c)).epsilon(1e-6));
  }
}

TEST_CASE("starting at the steady state stays on the plateau") {
  const HemoConstants c;
  const Vector z = Vector::Constant(2, 0.3);
  BalloonState st = BalloonState::steady(z, c);
  const Matrix in = Matrix::Constant(6000, 2, 0.3);
  const Matrix bold = bold_transform(in, 10.0, 720.0, c, st);
  for (Eigen::Index r = 0; r < bold.rows(); ++r) {
    CHECK(bold(r, 0) == doctest::Approx(plateau_bold(0.3, c)).epsilon(1e-10));
  }
}

TEST_CASE("BOLD is linear in V0") {
  HemoConstants a, b;
  b.V0 = 3.0 * a.V0;
  Matrix in(3000, 2);
  for (Eigen::Index k = 0; k < in.rows(); ++k) {
    in(k, 0) = 0.3 + 0.2 * std::sin(k * 0.01);
    in(k, 1) = 0.1 * (k % 500 < 250);
  }
  const Matrix ba = bold_transform(in, 10.0, 720.0, a);
  const Matrix bb = bold_transform(in, 10.0, 720.0, b);
  CHECK((bb - 3.0 * ba).cwiseAbs().maxCoeff() <= 1e-15 + 1e-12 * ba.cwiseAbs().maxCoeff());
}

TEST_CASE("a positive input step raises BOLD") {
  Matrix in = Matrix::Zero(3000, 1);
  in.bottomRows(2900).setConstant(0.5);
  const Matrix bold = bold_transform(in, 10.0, 720.0);
  CHECK(bold.maxCoeff() > 0.0);
  CHECK(bold(bold.rows() - 1, 0) > 0.0);
}

TEST_CASE("bold_transform rejects bad arguments") {
  CHECK_THROWS_AS(bold_transform(Matrix(0, 2), 10.0, 720.0), std::invalid_argument);
  CHECK_THROWS_AS(bold_transform(Matrix::Zero(10, 2), 0.0, 720.0), std::invalid_argument);
  CHECK_THROWS_AS(bold_transform(Matrix::Zero(10, 2), 10.0, 5.0), std::invalid_argument);
  CHECK_THROWS_AS(bold_transform(Matrix::Constant(10, 1, NAN), 10.0, 20.0), InstabilityError);
}

TEST_CASE("constant input from rest has settled after 60 s") {
  const Matrix in = Matrix::Constant(6000, 1, 0.1);
  const Matrix bold = bold_transform(in, 10.0, 720.0);
  const auto tail = static_cast<Eigen::Index>(std::ceil(0.1 * bold.rows()));
  const auto last = bold.bottomRows(tail);
  CHECK(last.maxCoeff() - last.minCoeff() < 1e-6);
}
