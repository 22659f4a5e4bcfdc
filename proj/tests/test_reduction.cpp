#include <catch2/catch_amalgamated.hpp>

#include "sdesym/reduction.hpp"
#include "sdesym/sim.hpp"
#include "testutil.hpp"

using namespace sdesym;
using testutil::model_ctx;

namespace {

bool zero_on_model(const ItoSDE& sde, const Expr& e, double tol = 1e-9) {
  return is_zero(e, sde.domain(), tol, sde.constants).passes();
}

bool zero_on(const Expr& e, const SampleDomain& dom, const ConstMap& consts,
             double tol = 1e-9) {
  return is_zero(e, dom, tol, consts).passes();
}

}  // namespace

TEST_CASE("adapted coordinate: scaling field gives log") {
  ParseContext c;
  c.n = 1;
  c.m = 1;
  Expr y = adapted_coordinate_1d(parse("x1", c));
  CHECK(structurally_equal(y, simplify(parse("log(x1)", c))));
}

TEST_CASE("adapted coordinate: logistic random symmetry") {
  auto sde = testutil::logistic();
  auto c = model_ctx(sde);
  Expr phi = parse("x1^2*exp(-((alpha - gamma^2/2)*t + gamma*w1))", c);
  Expr y = adapted_coordinate_1d(phi);
  Expr expected = parse("-(1/x1)*exp((alpha - gamma^2/2)*t + gamma*w1)", c);
  CHECK(zero_on_model(sde, y - expected));
}

TEST_CASE("adapted coordinate: identity and exponential patterns") {
  ParseContext c;
  c.n = 1;
  c.m = 1;
  c.constants = {"a"};
  CHECK(structurally_equal(adapted_coordinate_1d(parse("1", c)),
                           Expr::state(1)));
  // phi = e^{a x}: y = -e^{-a x}/a
  Expr y = adapted_coordinate_1d(parse("exp(a*x1)", c));
  SampleDomain dom = SampleDomain::defaults(1, 1);
  CHECK(zero_on(y - parse("-exp(-a*x1)/a", c), dom, {{"a", 0.7}}));
  // phi = c x^3: y = x^{-2} / (-2 c)
  Expr y3 = adapted_coordinate_1d(parse("2*x1^3", c));
  CHECK(zero_on(y3 - parse("x1^(-2)/(-4)", c), dom, {{"a", 0.7}}));
}

TEST_CASE("adapted coordinate: correctness property dphi/dx * phi = 1") {
  auto sde = testutil::logistic();
  auto c = model_ctx(sde);
  std::vector<std::string> phis = {
      "x1",
      "x1^2*exp(-((alpha - gamma^2/2)*t + gamma*w1))",
      "1",
      "3*x1^2",
      "exp(2*x1)",
      "x1^0.5",
      "exp(-(x1))*exp(gamma*w1)",
  };
  for (const auto& p : phis) {
    Expr phi = parse(p, c);
    Expr y = adapted_coordinate_1d(phi);
    Expr check = diff(y, VarKind::State, 1) * phi - Expr::number(1.0);
    CAPTURE(p, to_string(y));
    CHECK(is_zero(check, sde.domain(), 1e-10, sde.constants).passes());
  }
}

TEST_CASE("adapted coordinate: non-separable inputs are rejected") {
  ParseContext c;
  c.n = 1;
  c.m = 1;
  CHECK_THROWS_AS(adapted_coordinate_1d(parse("x1 + 1", c)),
                  NonSeparableError);
  CHECK_THROWS_AS(adapted_coordinate_1d(parse("x1*exp(x1)", c)),
                  NonSeparableError);
  CHECK_THROWS_AS(adapted_coordinate_1d(parse("sin(x1)", c)),
                  NonSeparableError);
  CHECK_THROWS_AS(adapted_coordinate_1d(parse("exp(t*x1)", c)),
                  NonSeparableError);
}

TEST_CASE("change of variables: gbm log coordinate") {
  auto sde = testutil::gbm();
  auto c = model_ctx(sde);
  Transform T;
  T.forward = {parse("log(x1)", c)};
  T.inverse = {parse("exp(y1)", model_ctx(sde, "y"))};
  auto out = change_variables(sde, T);
  CHECK(out.itoness == Itoness::ItoSymbolic);
  CHECK(zero_on_model(sde, out.drift[0] - parse("alpha - beta^2/2", c)));
  CHECK(zero_on_model(sde, out.diffusion[0][0] - parse("beta", c)));
}

TEST_CASE("change of variables: identity transform") {
  auto sde = testutil::gbm();
  auto c = model_ctx(sde);
  Transform T;
  T.forward = {parse("x1", c)};
  T.inverse = {parse("y1", model_ctx(sde, "y"))};
  auto out = change_variables(sde, T);
  CHECK(out.is_ito());
  CHECK(zero_on_model(sde, out.drift[0] - sde.f[0]));
  CHECK(zero_on_model(sde, out.diffusion[0][0] - sde.sigma[0][0]));
}

TEST_CASE("change of variables: logistic leaves the ito class") {
  auto sde = testutil::logistic();
  auto c = model_ctx(sde);
  const std::string E = "exp((alpha - gamma^2/2)*t + gamma*w1)";
  Transform T;
  T.forward = {parse("-(1/x1)*" + E, c)};
  T.inverse = {parse("-(1/y1)*" + E, model_ctx(sde, "y"))};
  SampleDomain box = SampleDomain::defaults(1, 1);
  box.x_ranges[0] = {-5.0, -0.2};  // y = -(1/x) e^{...} is negative
  T.sample_box = box;
  auto out = change_variables(sde, T);
  CHECK(out.itoness == Itoness::NotIto);
  CHECK(zero_on(out.drift[0] - parse("-beta*" + E, c), box, sde.constants));
  CHECK(zero_on(out.diffusion[0][0], box, sde.constants));
}

TEST_CASE("change of variables: triangular reduction of the 2d system") {
  auto sde = testutil::exp_reducible_2d();
  auto cy = model_ctx(sde, "y");
  Transform T;
  T.forward = {parse("exp(x1)", model_ctx(sde)),
               parse("exp(-x2)", model_ctx(sde))};
  T.inverse = {parse("log(y1)", cy), parse("-log(y2)", cy)};
  SampleDomain box = SampleDomain::defaults(2, 2);
  box.x_ranges = {{1.3, 7.0}, {0.15, 0.8}};  // image of the default x box
  T.sample_box = box;
  auto out = change_variables(sde, T);
  CHECK(out.is_ito());
  auto cx = model_ctx(sde);  // transformed coefficients read y in x slots
  CHECK(zero_on(out.drift[0] - parse("x1^2", cx), box, sde.constants));
  CHECK(zero_on(out.drift[1] - parse("-x1", cx), box, sde.constants));
  CHECK(zero_on(out.diffusion[0][0] - Expr::number(1.0), box, sde.constants));
  CHECK(zero_on(out.diffusion[0][1], box, sde.constants));
  CHECK(zero_on(out.diffusion[1][0] - parse("x1", cx), box, sde.constants));
  CHECK(zero_on(out.diffusion[1][1] - Expr::number(1.0), box, sde.constants));
}

TEST_CASE("change of variables: straightening sends the field to d/dy") {
  // For each 1d case: pushing phi through its adapted coordinate gives 1.
  struct Case {
    ItoSDE sde;
    std::string phi;
  };
  std::vector<Case> cases = {{testutil::gbm(), "x1"},
                             {testutil::logistic(),
                              "x1^2*exp(-((alpha - gamma^2/2)*t + gamma*w1))"}};
  for (auto& cse : cases) {
    auto c = model_ctx(cse.sde);
    Expr phi = parse(cse.phi, c);
    Expr y = adapted_coordinate_1d(phi);
    // pushed-forward coefficient: X(y) = phi dy/dx, then x -> inverse(y).
    Expr pushed = simplify(phi * diff(y, VarKind::State, 1));
    CAPTURE(cse.sde.name);
    CHECK(is_zero(pushed - Expr::number(1.0), cse.sde.domain(), 1e-9,
                  cse.sde.constants)
              .passes());
  }
}

TEST_CASE("change of variables: bad inverse is rejected") {
  auto sde = testutil::gbm();
  auto c = model_ctx(sde);
  Transform T;
  T.forward = {parse("log(x1)", c)};
  T.inverse = {parse("y1^2", model_ctx(sde, "y"))};  // not the inverse
  CHECK_THROWS_AS(change_variables(sde, T), std::invalid_argument);
}

TEST_CASE("reconstruct: degenerate integrands") {
  GridSpec grid{0.0, 0.25, 8};
  WienerPath path = sample_wiener(1, grid, 3);
  std::vector<double> zero(8, 0.0), one(8, 1.0);

  auto constant = reconstruct(grid.h, path.increments, zero, {zero}, 2.5);
  for (double v : constant) CHECK(v == 2.5);

  auto sum = reconstruct(grid.h, path.increments, zero, {one}, 1.0);
  double w = 0.0;
  for (int j = 0; j < 8; ++j) w += path.increments[j][0];
  CHECK(sum.back() == Catch::Approx(1.0 + w).margin(1e-15));

  CHECK_THROWS_AS(
      reconstruct(grid.h, path.increments, std::vector<double>(3, 0.0), {},
                  0.0),
      std::invalid_argument);
}

TEST_CASE("reconstruct: logistic quadrature matches the EM solution") {
  auto sde = testutil::logistic();
  double alpha = 1.0, beta = 0.5, gamma = 0.4;
  double A = alpha - gamma * gamma / 2;
  double x0 = 0.8;
  double T = 1.0;
  const int fine_steps = 1024;
  const int paths = 50;

  // RMS over an ensemble of the per-path worst gap, one Brownian motion per
  // path shared across refinement levels by sub-summing.
  std::vector<double> rms;
  for (int level = 0; level < 4; ++level) {
    int steps = 128 << level;
    double acc = 0.0;
    for (int p = 0; p < paths; ++p) {
      WienerPath fine = sample_wiener(
          1, {0.0, T / fine_steps, fine_steps}, 11,
          static_cast<std::uint64_t>(p));
      WienerPath path = coarsen(fine, fine_steps / steps);
      Trajectory em = euler_maruyama(sde, {x0}, path);
      auto wcum = path.cumulative();
      std::vector<double> integrand(static_cast<std::size_t>(steps));
      for (int j = 0; j < steps; ++j)
        integrand[static_cast<std::size_t>(j)] =
            -beta * std::exp(A * path.grid.time_at(j) + gamma * wcum[j][0]);
      auto y =
          reconstruct(path.grid.h, path.increments, integrand, {}, -1.0 / x0);
      double gap = 0.0;
      for (int j = 0; j <= steps; ++j) {
        double xq = -(1.0 / y[static_cast<std::size_t>(j)]) *
                    std::exp(A * path.grid.time_at(j) + gamma * wcum[j][0]);
        gap = std::max(
            gap, std::abs(xq - em.states[static_cast<std::size_t>(j)][0]));
      }
      acc += gap * gap;
    }
    rms.push_back(std::sqrt(acc / paths));
  }
  // errors shrink with h: monotone and at rate >= 1.3 per halving on average
  for (std::size_t i = 0; i + 1 < rms.size(); ++i) {
    CAPTURE(i, rms[i], rms[i + 1]);
    CHECK(rms[i] > rms[i + 1]);
  }
  double geo = std::pow(rms.front() / rms.back(),
                        1.0 / static_cast<double>(rms.size() - 1));
  CHECK(geo >= 1.3);
  CHECK(rms.back() < 1e-2);
}
