#include <catch2/catch_amalgamated.hpp>

#include "sdesym/model.hpp"
#include "sdesym/parser.hpp"
#include "testutil.hpp"

using namespace sdesym;
using testutil::model_ctx;

namespace {

bool zero_on_model(const ItoSDE& sde, const Expr& e, double tol = 1e-9) {
  return is_zero(e, sde.domain(), tol, sde.constants).passes();
}

}  // namespace

TEST_CASE("ito laplacian: gbm log coordinate") {
  auto sde = testutil::gbm();
  auto c = model_ctx(sde);
  // Delta log(x) = (sigma sigma^T) * (-1/x^2) = -beta^2
  Expr lap = ito_laplacian(sde, parse("log(x1)", c));
  CHECK(zero_on_model(sde, lap - parse("-(beta^2)", c)));
}

TEST_CASE("ito laplacian: time-only function vanishes") {
  auto sde = testutil::gbm();
  auto c = model_ctx(sde);
  CHECK(ito_laplacian(sde, parse("exp(2*t) + t^3", c)).is_number(0.0));
}

TEST_CASE("ito laplacian: invariant sphere radius") {
  auto sde = testutil::misawa();
  auto c = model_ctx(sde);
  Expr J = parse("x1^2 + x2^2 + x3^2", c);
  Expr expected = parse("4*(x1^2 + x2^2 + x3^2 - (x1*x2 + x2*x3 + x3*x1))", c);
  Expr lap = ito_laplacian(sde, J);
  CHECK(simplify(lap - expected).is_number(0.0));
}

TEST_CASE("ito differential: gbm log coordinate") {
  auto sde = testutil::gbm();
  auto c = model_ctx(sde);
  auto [drift, diffusion] = ito_differential(sde, parse("log(x1)", c));
  CHECK(zero_on_model(sde, drift - parse("alpha - beta^2/2", c)));
  REQUIRE(diffusion.size() == 1);
  CHECK(zero_on_model(sde, diffusion[0] - parse("beta", c)));
}

TEST_CASE("ito differential: F = t") {
  auto sde = testutil::gbm();
  auto [drift, diffusion] = ito_differential(sde, Expr::time());
  CHECK(drift.is_number(1.0));
  CHECK(diffusion[0].is_number(0.0));
}

TEST_CASE("ito differential: misawa linear invariant") {
  auto sde = testutil::misawa();
  auto c = model_ctx(sde);
  auto [drift, diffusion] = ito_differential(sde, parse("x1 + x2 + x3", c));
  CHECK(drift.is_number(0.0));
  REQUIRE(diffusion.size() == 1);
  CHECK(diffusion[0].is_number(0.0));
}

TEST_CASE("ito differential linearity") {
  auto sde = testutil::iso2d();
  auto c = model_ctx(sde);
  Expr F = parse("x1^2*exp(-t) + w1", c);
  Expr G = parse("sin(x2) + x1*w2", c);
  double a = 1.7, b = -0.4;
  auto [dF, kF] = ito_differential(sde, F);
  auto [dG, kG] = ito_differential(sde, G);
  auto [dC, kC] = ito_differential(sde, a * F + b * G);
  CHECK(zero_on_model(sde, dC - (a * dF + b * dG)));
  for (int k = 0; k < sde.m; ++k)
    CHECK(zero_on_model(sde, kC[k] - (a * kF[k] + b * kG[k])));
}

TEST_CASE("ito <-> stratonovich: gbm drift correction") {
  auto sde = testutil::gbm();
  auto c = model_ctx(sde);
  StratSDE strat = ito_to_stratonovich(sde);
  CHECK(zero_on_model(sde, strat.b[0] - parse("(alpha - beta^2/2)*x1", c)));
}

TEST_CASE("ito <-> stratonovich: constant sigma is unchanged") {
  auto sde = testutil::iso2d();
  StratSDE strat = ito_to_stratonovich(sde);
  for (int i = 0; i < sde.n; ++i)
    CHECK(simplify(strat.b[i] - sde.f[i]).is_number(0.0));
}

TEST_CASE("ito <-> stratonovich: round trip is the identity") {
  for (const auto& sde : {testutil::gbm(), testutil::logistic(),
                          testutil::misawa(), testutil::iso2d(),
                          testutil::transient_drift(), testutil::t_dw()}) {
    ItoSDE back = stratonovich_to_ito(ito_to_stratonovich(sde));
    for (int i = 0; i < sde.n; ++i) {
      CAPTURE(sde.name, i);
      // the correction terms cancel exactly in the normal form
      CHECK(structurally_equal(simplify(back.f[i]), simplify(sde.f[i])));
      CHECK(zero_on_model(sde, back.f[i] - sde.f[i]));
      CHECK(structurally_equal(simplify(back.sigma[i][0]),
                               simplify(sde.sigma[i][0])));
    }
  }
}

TEST_CASE("fokker-planck coefficients: gbm") {
  auto sde = testutil::gbm();
  auto c = model_ctx(sde);
  FPCoefficients fp = fokker_planck_coeffs(sde);
  CHECK(zero_on_model(sde, fp.A[0][0] - parse("beta^2*x1^2/2", c)));
  CHECK(zero_on_model(sde, fp.B[0] - parse("alpha*x1 - 2*beta^2*x1", c)));
  CHECK(zero_on_model(sde, fp.C - parse("alpha - beta^2", c)));
}

TEST_CASE("fokker-planck coefficients: zero drift, constant noise") {
  ItoSDE sde;
  sde.name = "flat";
  sde.n = 1;
  sde.m = 1;
  ParseContext c;
  c.n = 1;
  c.m = 1;
  c.constants = {"sigma"};
  sde.constants = {{"sigma", 0.7}};
  sde.f = {parse("0", c)};
  sde.sigma = {{parse("sigma", c)}};
  FPCoefficients fp = fokker_planck_coeffs(sde);
  CHECK(zero_on_model(sde, fp.A[0][0] - parse("sigma^2/2", c)));
  CHECK(fp.B[0].is_number(0.0));
  CHECK(fp.C.is_number(0.0));
}

TEST_CASE("fokker-planck coefficients: 2d isotropic") {
  auto sde = testutil::iso2d();
  auto c = model_ctx(sde);
  FPCoefficients fp = fokker_planck_coeffs(sde);
  CHECK(zero_on_model(sde, fp.A[0][0] - parse("mu^2/2", c)));
  CHECK(zero_on_model(sde, fp.A[1][1] - parse("mu^2/2", c)));
  CHECK(fp.A[0][1].is_number(0.0));
  CHECK(zero_on_model(sde, fp.B[0] - parse("lambda*x1", c)));
  CHECK(zero_on_model(sde, fp.B[1] - parse("lambda*x2", c)));
  CHECK(zero_on_model(sde, fp.C - parse("2*lambda", c)));
}

TEST_CASE("fokker-planck: long and short forms agree symbolically") {
  for (const auto& sde : {testutil::gbm(), testutil::logistic(),
                          testutil::misawa(), testutil::iso2d(),
                          testutil::transient_drift(), testutil::t_dw()}) {
    FPCoefficients fp = fokker_planck_coeffs(sde);
    for (const auto& r : fp_consistency_residuals(sde, fp)) {
      CAPTURE(sde.name, to_string(r));
      CHECK(zero_on_model(sde, r));
    }
    // A is symmetric after simplify
    for (int i = 0; i < sde.n; ++i)
      for (int j = 0; j < sde.n; ++j)
        CHECK(structurally_equal(simplify(fp.A[i][j]), simplify(fp.A[j][i])));
  }
}

TEST_CASE("autonomy detection") {
  CHECK(is_autonomous(testutil::gbm()));
  CHECK(!is_autonomous(testutil::transient_drift()));
  CHECK(!is_autonomous(testutil::t_dw()));
}

TEST_CASE("model validation rejects w-dependent coefficients") {
  ItoSDE sde;
  sde.n = 1;
  sde.m = 1;
  ParseContext c;
  c.n = 1;
  c.m = 1;
  sde.f = {parse("x1*w1", c)};
  sde.sigma = {{parse("x1", c)}};
  CHECK_THROWS_AS(sde.validate(), std::invalid_argument);
}
