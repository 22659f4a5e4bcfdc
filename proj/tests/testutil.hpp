#pragma once

#include <string>
#include <vector>

#include "sdesym/expr.hpp"
#include "sdesym/parser.hpp"
#include "sdesym/rng.hpp"

namespace testutil {

using namespace sdesym;

inline ParseContext ctx2(int n = 2, int m = 2) {
  ParseContext c;
  c.n = n;
  c.m = m;
  c.constants = {"alpha", "beta", "gamma", "a", "b", "c", "kappa",
                 "lambda", "mu", "omega", "sigma"};
  return c;
}

inline ConstMap test_consts() {
  return {{"alpha", 1.1},  {"beta", 0.7},  {"gamma", 0.4}, {"a", 1.3},
          {"b", 0.5},      {"c", 0.9},     {"kappa", 0.6}, {"lambda", 0.8},
          {"mu", 0.6},     {"omega", 1.2}, {"sigma", 0.3}};
}

/// Hand-written corpus exercising every node kind; all well defined on the
/// default sampling box.
inline std::vector<Expr> corpus() {
  auto c = ctx2();
  std::vector<std::string> texts = {
      "x1^2 + x2^2",
      "x1*exp(-t)",
      "w1 - log(x1)",
      "alpha*x1 - beta*x1^2",
      "sin(x1)*cos(x2) + tan(x1/4)",
      "atan((x1 - 3*x2)/(1 + x2^2))",
      "sqrt(x1^2 + x2^2)",
      "exp(alpha*t + gamma*w1)/x1",
      "x1^2*exp(-(a*t + gamma*w1))",
      "(1 - x1^2)*x2 + omega*x1^2",
      "1/(x1 + x2) + x1/x2",
      "x1^0.5*x2^2 - 2^t",
      "log(x1*x2) + w2^2/2",
      "-x1^2 + (-x2)^2",
  };
  std::vector<Expr> out;
  for (const auto& s : texts) out.push_back(parse(s, c));
  return out;
}

/// Deterministic random expression trees (for round-trip and soundness
/// properties). Generated exprs may be singular somewhere; callers skip
/// domain violations.
inline Expr random_expr(std::uint64_t seed, std::uint64_t id, int depth = 0) {
  std::uint64_t draw = id * 64 + static_cast<std::uint64_t>(depth) * 7;
  auto u = [&](int span) {
    return static_cast<int>(
        rng::uniform_open01(seed, rng::kStreamGenerators, draw++) * span);
  };
  auto ur = [&](double lo, double hi) {
    return lo +
           (hi - lo) * rng::uniform_open01(seed, rng::kStreamGenerators,
                                           draw++);
  };
  if (depth >= 4 || u(10) < 3) {
    switch (u(5)) {
      case 0: return Expr::number(std::round(ur(-4, 4) * 4) / 4.0);
      case 1: return Expr::time();
      case 2: return Expr::state(1 + u(2));
      case 3: return Expr::wiener(1 + u(2));
      default: return Expr::param(u(2) == 0 ? "alpha" : "beta");
    }
  }
  Expr a = random_expr(seed, id * 2 + 1, depth + 1);
  Expr b = random_expr(seed, id * 2 + 2, depth + 1);
  switch (u(11)) {
    case 0: return a + b;
    case 1: return a - b;
    case 2: return a * b;
    case 3: return a / b;
    case 4: return pow(a, Expr::number(1 + u(3)));
    case 5: return -a;
    case 6: return sin(a);
    case 7: return cos(a);
    case 8: return exp(Expr::number(0.2) * a);
    case 9: return log(Expr::number(2.0) + a * a);
    default: return sqrt(Expr::number(1.0) + a * a);
  }
}

inline Binding random_binding(std::uint64_t seed, std::uint64_t id, int n = 2,
                              int m = 2) {
  Binding b;
  std::uint64_t draw = 1000000 + id * 16;
  auto ur = [&](double lo, double hi) {
    return lo +
           (hi - lo) * rng::uniform_open01(seed, rng::kStreamGenerators,
                                           draw++);
  };
  b.t = ur(0.1, 2.0);
  for (int i = 0; i < n; ++i) b.x.push_back(ur(0.2, 2.0));
  for (int k = 0; k < m; ++k) b.w.push_back(ur(-1.0, 1.0));
  return b;
}

}  // namespace testutil

#include "sdesym/model.hpp"
#include "sdesym/symmetry.hpp"

namespace testutil {

/// dx = alpha x dt + beta x dw (geometric Brownian motion).
inline ItoSDE gbm(double alpha = 1.0, double beta = 0.5) {
  ItoSDE sde;
  sde.name = "gbm";
  sde.n = 1;
  sde.m = 1;
  sde.constants = {{"alpha", alpha}, {"beta", beta}};
  ParseContext c;
  c.n = 1;
  c.m = 1;
  c.constants = {"alpha", "beta"};
  sde.f = {parse("alpha*x1", c)};
  sde.sigma = {{parse("beta*x1", c)}};
  sde.validate();
  return sde;
}

/// Three-state single-noise rotation-like system with invariant sphere.
inline ItoSDE misawa() {
  ItoSDE sde;
  sde.name = "misawa";
  sde.n = 3;
  sde.m = 1;
  ParseContext c;
  c.n = 3;
  c.m = 1;
  sde.f = {parse("x3 - x2 - (2*x1 - x2 - x3)/2", c),
           parse("x1 - x3 - (2*x2 - x3 - x1)/2", c),
           parse("x2 - x1 - (2*x3 - x1 - x2)/2", c)};
  sde.sigma = {{parse("x3 - x2", c)},
               {parse("x1 - x3", c)},
               {parse("x2 - x1", c)}};
  sde.validate();
  return sde;
}

/// dx^i = lambda x^i dt + mu dw^i, i = 1,2 (isotropic linear system).
inline ItoSDE iso2d(double lambda = 0.8, double mu = 0.6) {
  ItoSDE sde;
  sde.name = "iso2d";
  sde.n = 2;
  sde.m = 2;
  sde.constants = {{"lambda", lambda}, {"mu", mu}};
  ParseContext c;
  c.n = 2;
  c.m = 2;
  c.constants = {"lambda", "mu"};
  sde.f = {parse("lambda*x1", c), parse("lambda*x2", c)};
  sde.sigma = {{parse("mu", c), parse("0", c)},
               {parse("0", c), parse("mu", c)}};
  sde.validate();
  return sde;
}

/// dx = (alpha x - beta x^2) dt + gamma x dw (logistic with noise).
inline ItoSDE logistic(double alpha = 1.0, double beta = 0.5,
                       double gamma = 0.4) {
  ItoSDE sde;
  sde.name = "logistic";
  sde.n = 1;
  sde.m = 1;
  sde.constants = {{"alpha", alpha}, {"beta", beta}, {"gamma", gamma}};
  ParseContext c;
  c.n = 1;
  c.m = 1;
  c.constants = {"alpha", "beta", "gamma"};
  sde.f = {parse("alpha*x1 - beta*x1^2", c)};
  sde.sigma = {{parse("gamma*x1", c)}};
  sde.validate();
  return sde;
}

/// dx = x e^{-t} dt + x dw (decaying drift, multiplicative noise).
inline ItoSDE transient_drift() {
  ItoSDE sde;
  sde.name = "transient_drift";
  sde.n = 1;
  sde.m = 1;
  ParseContext c;
  c.n = 1;
  c.m = 1;
  sde.f = {parse("x1*exp(-t)", c)};
  sde.sigma = {{parse("x1", c)}};
  sde.validate();
  return sde;
}

/// dx = t dw.
inline ItoSDE t_dw() {
  ItoSDE sde;
  sde.name = "t_dw";
  sde.n = 1;
  sde.m = 1;
  ParseContext c;
  c.n = 1;
  c.m = 1;
  sde.f = {parse("0", c)};
  sde.sigma = {{parse("t", c)}};
  sde.validate();
  return sde;
}

inline ParseContext model_ctx(const ItoSDE& sde,
                              const std::string& prefix = "x") {
  ParseContext c;
  c.n = sde.n;
  c.m = sde.m;
  c.state_prefix = prefix;
  for (const auto& [k, v] : sde.constants) c.constants.insert(k);
  return c;
}

}  // namespace testutil

namespace testutil {

/// 2-state system with exponential coefficients, reducible to triangular
/// form by y1 = e^{x1}, y2 = e^{-x2}.
inline ItoSDE exp_reducible_2d() {
  ItoSDE sde;
  sde.name = "exp_reducible_2d";
  sde.n = 2;
  sde.m = 2;
  ParseContext c;
  c.n = 2;
  c.m = 2;
  sde.f = {parse("exp(x1) - exp(-2*x1)/2", c),
           parse("exp(x2)*(2*exp(x1) + exp(x2) + exp(2*x1 + x2))/2", c)};
  sde.sigma = {{parse("exp(-x1)", c), parse("0", c)},
               {parse("-exp(x1 + x2)", c), parse("-exp(x2)", c)}};
  sde.validate();
  return sde;
}

inline SimpleVectorField field1(const ItoSDE& sde, const std::string& phi,
                                double R = 0.0,
                                const std::string& name = "") {
  SimpleVectorField X;
  X.name = name;
  X.phi = {parse(phi, model_ctx(sde))};
  X.R = {{R}};
  return X;
}

}  // namespace testutil

namespace testutil {

/// Planar system with the unit circle invariant, written in Cartesian
/// coordinates; J = x1^2 + x2^2 is conditionally invariant on J = 1.
inline ItoSDE limit_cycle_cartesian(double alpha = 0.8, double beta = 0.5,
                                    double omega = 1.0, double sigma = 0.3) {
  ItoSDE sde;
  sde.name = "limit_cycle_cartesian";
  sde.n = 2;
  sde.m = 2;
  sde.constants = {{"alpha", alpha}, {"beta", beta}, {"omega", omega},
                   {"sigma", sigma}};
  ParseContext c;
  c.n = 2;
  c.m = 2;
  c.constants = {"alpha", "beta", "omega", "sigma"};
  const std::string r2 = "(x1^2 + x2^2)";
  sde.f = {parse("(alpha*(1 - " + r2 + ") - sigma^2/2)*x1 - (beta*(1 - " + r2 +
                     ") + omega*" + r2 + ")*x2",
                 c),
           parse("(beta*(1 - " + r2 + ") + omega*" + r2 +
                     ")*x1 + (alpha*(1 - " + r2 + ") - sigma^2/2)*x2",
                 c)};
  sde.sigma = {{parse("sigma*(1 - " + r2 + ")*x1", c), parse("-sigma*x2", c)},
               {parse("sigma*(1 - " + r2 + ")*x2", c), parse("sigma*x1", c)}};
  sde.validate();
  return sde;
}

/// Polar form of the same dynamics (x1 = radius, x2 = angle).
inline ItoSDE limit_cycle_polar(double a = 1.0, double b = 0.5,
                                double omega = 1.0, double sigma = 0.1) {
  ItoSDE sde;
  sde.name = "limit_cycle_polar";
  sde.n = 2;
  sde.m = 2;
  sde.constants = {{"a", a}, {"b", b}, {"omega", omega}, {"sigma", sigma}};
  ParseContext c;
  c.n = 2;
  c.m = 2;
  c.constants = {"a", "b", "omega", "sigma"};
  sde.f = {parse("a*(1 - x1^2)*x1", c),
           parse("b*(1 - x1^2) + omega*x1^2", c)};
  sde.sigma = {{parse("sigma*(1 - x1^2)", c), parse("0", c)},
               {parse("0", c), parse("sigma", c)}};
  sde.validate();
  return sde;
}

/// Circle-preserving family in Cartesian coordinates, instantiated with
/// constant coefficient functions.
inline ItoSDE circle_family_cartesian() {
  ItoSDE sde;
  sde.name = "circle_family_cartesian";
  sde.n = 2;
  sde.m = 2;
  sde.constants = {{"f1", 0.8},  {"f2", 1.0},  {"s11", 0.3},
                   {"s12", 0.2}, {"s21", 0.1}, {"s22", 0.4}};
  ParseContext c;
  c.n = 2;
  c.m = 2;
  c.constants = {"f1", "f2", "s11", "s12", "s21", "s22"};
  const std::string r = "sqrt(x1^2 + x2^2)";
  sde.f = {parse("(1 - " + r + ")*x1*f1 - x2*f2 - ((1 - " + r +
                     ")^2/2)*((s21^2 + s22^2)*x1 + 2*(s11*s21 + s12*s22)*x2)",
                 c),
           parse("x1*f2 + (1 - " + r + ")*x2*f1 + ((1 - " + r +
                     ")^2/2)*(2*(s11*s21 + s12*s22)*x1 - (s21^2 + s22^2)*x2)",
                 c)};
  sde.sigma = {{parse("(1 - " + r + ")*(s11*x1 - s21*x2)", c),
                parse("(1 - " + r + ")*(s12*x1 - s22*x2)", c)},
               {parse("(1 - " + r + ")*(s21*x1 + s11*x2)", c),
                parse("(1 - " + r + ")*(s22*x1 + s12*x2)", c)}};
  sde.validate();
  return sde;
}

}  // namespace testutil

namespace testutil {

/// dx = -(x + x^3) dt + sigma x dw; the origin is the invariant set.
inline ItoSDE cubic_decay_1d(double sigma = 0.3) {
  ItoSDE sde;
  sde.name = "cubic_decay_1d";
  sde.n = 1;
  sde.m = 1;
  sde.constants = {{"sigma", sigma}};
  ParseContext c;
  c.n = 1;
  c.m = 1;
  c.constants = {"sigma"};
  sde.f = {parse("-(x1 + x1^3)", c)};
  sde.sigma = {{parse("sigma*x1", c)}};
  sde.validate();
  return sde;
}

/// Planar system whose unit circle is strongly attractive (deterministic
/// radial part); noise acts tangentially.
inline ItoSDE strong_circle_attractor(double a = 1.0) {
  ItoSDE sde;
  sde.name = "strong_circle_attractor";
  sde.n = 2;
  sde.m = 2;
  sde.constants = {{"a", a},        {"b", 0.5},     {"alpha", 0.05},
                   {"beta", 0.03},  {"omega", 0.3}};
  ParseContext c;
  c.n = 2;
  c.m = 2;
  c.constants = {"a", "b", "alpha", "beta", "omega"};
  const std::string r = "sqrt(x1^2 + x2^2)";
  sde.f = {parse("(1 - " + r +
                     ")*(a*x1 - b*x2) - omega*x2 - (alpha^2 + beta^2)*x1/2",
                 c),
           parse("(1 - " + r +
                     ")*(b*x1 + a*x2) + omega*x1 - (alpha^2 + beta^2)*x2/2",
                 c)};
  sde.sigma = {{parse("-alpha*x2", c), parse("-beta*x2", c)},
               {parse("alpha*x1", c), parse("beta*x1", c)}};
  sde.validate();
  return sde;
}

}  // namespace testutil
