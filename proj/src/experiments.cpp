#include "fpsi/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "fpsi/fem/quadrature.hpp"

namespace fpsi {

namespace {

constexpr double pi = std::numbers::pi;

// Spatial profile shared by the fluid velocity and the displacement.
Vec2 profile(Point2 x) { return {-3.0 * x.x + std::cos(x.y), x.y + 1.0}; }
Tensor2 profile_grad(Point2 x) { return {{{-3.0, -std::sin(x.y)}, {0.0, 1.0}}}; }

double amp_u(double t) { return pi * std::cos(pi * t); }
double amp_u_dt(double t) { return -pi * pi * std::sin(pi * t); }
double amp_eta(double t) { return std::sin(pi * t); }

Vec2 scale(double a, Vec2 v) { return {a * v[0], a * v[1]}; }
Tensor2 scale(double a, Tensor2 g) { return {{scale(a, g[0]), scale(a, g[1])}}; }

Vec2 traction(const Tensor2& s, Point2 n) { return {s[0][0] * n.x + s[0][1] * n.y, s[1][0] * n.x + s[1][1] * n.y}; }

Vec2 as_vec(const std::array<double, 2>& a) { return {a[0], a[1]}; }

}  // namespace

ManufacturedSolution::ManufacturedSolution(PhysicalParams params) : p_(std::move(params)) {}

Vec2 ManufacturedSolution::u_f(double t, Point2 x) const { return scale(amp_u(t), profile(x)); }
Tensor2 ManufacturedSolution::grad_u_f(double t, Point2 x) const { return scale(amp_u(t), profile_grad(x)); }
Vec2 ManufacturedSolution::dt_u_f(double t, Point2 x) const { return scale(amp_u_dt(t), profile(x)); }

double ManufacturedSolution::p_f(double t, Point2 x) const { return p_p(t, x) + 2.0 * pi * std::cos(pi * t); }
Vec2 ManufacturedSolution::grad_p_f(double t, Point2 x) const { return grad_p_p(t, x); }

Vec2 ManufacturedSolution::eta(double t, Point2 x) const { return scale(amp_eta(t), profile(x)); }
Tensor2 ManufacturedSolution::grad_eta(double t, Point2 x) const { return scale(amp_eta(t), profile_grad(x)); }
Vec2 ManufacturedSolution::dt_eta(double t, Point2 x) const { return scale(amp_u(t), profile(x)); }
Vec2 ManufacturedSolution::dtt_eta(double t, Point2 x) const { return scale(amp_u_dt(t), profile(x)); }

double ManufacturedSolution::p_p(double t, Point2 x) const {
  return std::exp(t) * std::sin(pi * x.x) * std::cos(0.5 * pi * x.y);
}
Vec2 ManufacturedSolution::grad_p_p(double t, Point2 x) const {
  const double e = std::exp(t);
  return {e * pi * std::cos(pi * x.x) * std::cos(0.5 * pi * x.y),
          -e * 0.5 * pi * std::sin(pi * x.x) * std::sin(0.5 * pi * x.y)};
}
double ManufacturedSolution::dt_p_p(double t, Point2 x) const { return p_p(t, x); }

Vec2 ManufacturedSolution::u_p(double t, Point2 x) const {
  const Vec2 g = grad_p_p(t, x);
  const Eigen::Vector2d v = -(p_.K * Eigen::Vector2d(g[0], g[1])) / p_.mu_f;
  return {v[0], v[1]};
}

double ManufacturedSolution::div_u_p(double t, Point2 x) const {
  const double p = p_p(t, x);
  const double pxx = -pi * pi * p;
  const double pyy = -0.25 * pi * pi * p;
  const double pxy = -0.5 * pi * pi * std::exp(t) * std::cos(pi * x.x) * std::sin(0.5 * pi * x.y);
  const auto& K = p_.K;
  return -(K(0, 0) * pxx + (K(0, 1) + K(1, 0)) * pxy + K(1, 1) * pyy) / p_.mu_f;
}

Tensor2 ManufacturedSolution::sigma_f(double t, Point2 x) const {
  const Tensor2 g = grad_u_f(t, x);
  const double p = p_f(t, x);
  Tensor2 s{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s[i][j] = p_.mu_f * (g[i][j] + g[j][i]) - (i == j ? p : 0.0);
  return s;
}

Tensor2 ManufacturedSolution::sigma_p(double t, Point2 x) const {
  const Tensor2 g = grad_eta(t, x);
  const double div = g[0][0] + g[1][1];
  const double p = p_p(t, x);
  Tensor2 s{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      s[i][j] = p_.mu_p * (g[i][j] + g[j][i]) + (i == j ? p_.lambda_p * div - p_.alpha * p : 0.0);
  return s;
}

// rho_f du/dt - div sigma_f; the profile has div = -2 and Laplacian (-cos y, 0).
Vec2 ManufacturedSolution::f_f(double t, Point2 x) const {
  const double rho = p_.quasistatic_fluid ? 0.0 : p_.rho_f;
  const Vec2 w = profile(x);
  const Vec2 gp = grad_p_f(t, x);
  const double a = amp_u(t);
  return {rho * amp_u_dt(t) * w[0] + gp[0] + p_.mu_f * a * std::cos(x.y), rho * amp_u_dt(t) * w[1] + gp[1]};
}

double ManufacturedSolution::q_f(double t, Point2) const { return -2.0 * amp_u(t); }

Vec2 ManufacturedSolution::f_p(double t, Point2 x) const {
  const Vec2 w = profile(x);
  const Vec2 gp = grad_p_p(t, x);
  const double s = amp_eta(t);
  const double inertia = p_.rho_p * amp_u_dt(t) + p_.beta * s;
  return {inertia * w[0] + p_.mu_p * s * std::cos(x.y) + p_.alpha * gp[0], inertia * w[1] + p_.alpha * gp[1]};
}

double ManufacturedSolution::q_p(double t, Point2 x) const {
  return p_.s0 * dt_p_p(t, x) - 2.0 * p_.alpha * amp_u(t) + div_u_p(t, x);
}

double ManufacturedSolution::robin_n(double t, Point2 x) const {
  const Point2 n{0.0, 1.0};
  const Vec2 v = dt_eta(t, x);
  const Vec2 q = u_p(t, x);
  const Vec2 sn = traction(sigma_p(t, x), n);
  return -p_.gamma_f * (v[1] + q[1]) + sn[1];
}

double ManufacturedSolution::robin_t(double t, Point2 x) const {
  const Point2 n{0.0, 1.0};
  const Vec2 v = dt_eta(t, x);
  const Vec2 sn = traction(sigma_p(t, x), n);
  return -p_.gamma_f * (-v[0]) - sn[0];
}

std::pair<TriMesh, TriMesh> example1_meshes(int n) {
  if (n < 1) throw std::invalid_argument("example1_meshes: n must be positive");
  using namespace predicates;
  TriMesh fluid = tag_boundaries(build_rect_mesh(0.0, 1.0, 0.0, 1.0, n, n, DiagonalRule::LowerLeft, DomainLabel::Fluid),
                                 {{on_line_y(1.0), BoundaryTag::FluidDirichlet},
                                  {on_line_y(0.0), BoundaryTag::Interface},
                                  {on_line_x(0.0), BoundaryTag::FluidNeumann},
                                  {on_line_x(1.0), BoundaryTag::FluidNeumann}});
  TriMesh poro = tag_boundaries(
      build_rect_mesh(0.0, 1.0, -1.0, 0.0, n, n, DiagonalRule::LowerLeft, DomainLabel::Poroelastic),
      {{on_line_y(0.0), BoundaryTag::Interface},
       {on_line_y(-1.0), BoundaryTag::PoroDispDirichlet},
       {on_line_x(0.0), BoundaryTag::PoroTraction},
       {on_line_x(1.0), BoundaryTag::PoroTraction}});
  return {std::move(fluid), std::move(poro)};
}

CoupledProblem example1_problem(const ManufacturedSolution& ex, bool flux_sides) {
  CoupledProblem pb;
  pb.params = ex.params();
  pb.fluid_bc.dirichlet = {BoundaryTag::FluidDirichlet};
  pb.poro_bc.displacement = {BoundaryTag::PoroDispDirichlet};
  if (flux_sides) {
    pb.poro_bc.pressure = {BoundaryTag::PoroDispDirichlet};
    pb.poro_bc.flux = {BoundaryTag::PoroTraction};
  } else {
    pb.poro_bc.pressure = {BoundaryTag::PoroDispDirichlet, BoundaryTag::PoroTraction};
  }

  // The lambdas hold a copy so the problem outlives `ex`.
  auto e = std::make_shared<const ManufacturedSolution>(ex);
  pb.stokes.force = [e](double t, Point2 x) { return e->f_f(t, x); };
  pb.stokes.source = [e](double t, Point2 x) { return e->q_f(t, x); };
  pb.stokes.velocity = [e](double t, Point2 x) { return e->u_f(t, x); };
  pb.stokes.traction = [e](double t, Point2 x, Point2 n, BoundaryTag) { return traction(e->sigma_f(t, x), n); };
  pb.biot.force = [e](double t, Point2 x) { return e->f_p(t, x); };
  pb.biot.source = [e](double t, Point2 x) { return e->q_p(t, x); };
  pb.biot.displacement = [e](double t, Point2 x) { return e->eta(t, x); };
  pb.biot.flux = [e](double t, Point2 x) { return e->u_p(t, x); };
  pb.biot.pressure = [e](double t, Point2 x) { return e->p_p(t, x); };
  pb.biot.traction = [e](double t, Point2 x, Point2 n, BoundaryTag) { return traction(e->sigma_p(t, x), n); };
  return pb;
}

CoupledState example1_initial_state(const Discretization& d, const ManufacturedSolution& ex, double t0) {
  CoupledState s;
  s.t = t0;
  s.u_f = d.fluid_velocity->interpolate(VectorFunction([&](Point2 x) { return ex.u_f(t0, x); }));
  s.p_f = d.fluid_pressure->interpolate(ScalarFunction([&](Point2 x) { return ex.p_f(t0, x); }));
  s.eta = d.displacement->interpolate(VectorFunction([&](Point2 x) { return ex.eta(t0, x); }));
  s.dt_eta = d.displacement->interpolate(VectorFunction([&](Point2 x) { return ex.dt_eta(t0, x); }));
  s.u_p = d.darcy_velocity->interpolate(VectorFunction([&](Point2 x) { return ex.u_p(t0, x); }));
  s.p_p = d.darcy_pressure->interpolate(ScalarFunction([&](Point2 x) { return ex.p_p(t0, x); }));
  s.mu = init_mu_analytic(
      *d.lambda, [&](int, Point2 x) { return ex.robin_n(t0, x); }, [&](int, Point2 x) { return ex.robin_t(t0, x); });
  return s;
}

CoupledProblem example1_free_problem(const PhysicalParams& params) {
  CoupledProblem pb = example1_problem(ManufacturedSolution(params));
  pb.stokes = {};
  pb.biot = {};
  return pb;
}

CoupledState example1_free_state(const Discretization& d, const PhysicalParams& params) {
  using std::numbers::pi;
  CoupledState s;
  // Velocities and displacements vanish on y = 1 and y = -1.
  s.u_f = d.fluid_velocity->interpolate(VectorFunction([](Point2 x) {
    return Vec2{std::sin(pi * x.x) * (1.0 - x.y), x.x * (1.0 - x.y) * (1.0 + x.y)};
  }));
  s.p_f = d.fluid_pressure->interpolate(ScalarFunction([](Point2 x) { return std::cos(x.x) + x.y; }));
  s.eta = d.displacement->interpolate(VectorFunction([](Point2 x) {
    return Vec2{0.5 * (1.0 + x.y) * std::sin(pi * x.x), 0.5 * (1.0 + x.y) * x.x * x.x};
  }));
  s.dt_eta = d.displacement->interpolate(
      VectorFunction([](Point2 x) { return Vec2{(1.0 + x.y) * std::cos(x.y), -(1.0 + x.y) * x.x}; }));
  s.u_p = d.darcy_velocity->interpolate(VectorFunction([](Point2 x) { return Vec2{x.x * x.y, x.x + x.y}; }));
  s.p_p = d.darcy_pressure->interpolate(ScalarFunction([](Point2 x) { return std::sin(pi * x.x) * (1.0 + x.y); }));
  const PoroFields poro{*d.displacement, *d.darcy_velocity, *d.darcy_pressure, s.eta, s.dt_eta, s.u_p, s.p_p};
  s.mu = init_mu_discrete(*d.lambda, poro, params);
  return s;
}

double ErrorRow::norm(int i) const {
  switch (i) {
    case 0: return u_f;
    case 1: return p_f;
    case 2: return u_p;
    case 3: return p_p;
    case 4: return eta;
    case 5: return dt_eta;
    case 6: return mu;
  }
  throw std::out_of_range("ErrorRow::norm");
}

const char* ErrorRow::norm_name(int i) {
  static const char* names[n_norms] = {"u_f", "p_f", "u_p", "p_p", "eta", "dt_eta", "mu"};
  if (i < 0 || i >= n_norms) throw std::out_of_range("ErrorRow::norm_name");
  return names[i];
}

FieldError field_error(const DofMap& V, const Eigen::VectorXd& x, const std::function<Vec2(Point2)>& value,
                       const std::function<Tensor2(Point2)>& grad, const std::function<double(Point2)>& div) {
  static const QuadratureRule rule = quadrature(7);
  double l2 = 0.0, h1 = 0.0, dv = 0.0;
  for (int c = 0; c < V.n_cells(); ++c) {
    const CellGeometry& geo = V.geometry(c);
    for (int q = 0; q < rule.size(); ++q) {
      const auto& xh = rule.points[q];
      const double w = rule.weights[q] * geo.detJ;
      const Point2 X = geo.map(xh[0], xh[1]);
      const DofMap::FieldValue fv = V.eval_field(x, c, xh);
      const Vec2 ex = value(X);
      l2 += w * (std::pow(fv.value[0] - ex[0], 2) + std::pow(fv.value[1] - ex[1], 2));
      if (grad) {
        const Tensor2 g = grad(X);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) h1 += w * std::pow(fv.grad[i][j] - g[i][j], 2);
      }
      if (div) dv += w * std::pow(fv.div - div(X), 2);
    }
  }
  return {std::sqrt(l2), std::sqrt(h1), std::sqrt(dv)};
}

ErrorAccumulator::ErrorAccumulator(const Discretization& d, const ManufacturedSolution& ex, double dt)
    : d_(d), ex_(ex), dt_(dt) {
  acc_.dt = dt;
}

void ErrorAccumulator::add(const CoupledState& s) {
  const double t = s.t;
  const auto scalar = [](auto f) { return [f](Point2 x) { return Vec2{f(x), 0.0}; }; };

  const FieldError uf = field_error(
      *d_.fluid_velocity, s.u_f, [&](Point2 x) { return ex_.u_f(t, x); },
      [&](Point2 x) { return ex_.grad_u_f(t, x); });
  const FieldError pf =
      field_error(*d_.fluid_pressure, s.p_f, scalar([&](Point2 x) { return ex_.p_f(t, x); }));
  const FieldError up = field_error(
      *d_.darcy_velocity, s.u_p, [&](Point2 x) { return ex_.u_p(t, x); }, {},
      [&](Point2 x) { return ex_.div_u_p(t, x); });
  const FieldError pp =
      field_error(*d_.darcy_pressure, s.p_p, scalar([&](Point2 x) { return ex_.p_p(t, x); }));
  const FieldError et = field_error(
      *d_.displacement, s.eta, [&](Point2 x) { return ex_.eta(t, x); },
      [&](Point2 x) { return ex_.grad_eta(t, x); });
  const FieldError de = field_error(*d_.displacement, s.dt_eta, [&](Point2 x) { return ex_.dt_eta(t, x); });

  // Interface error of mu against the closed-form Robin data.
  const LambdaSpace& L = *d_.lambda;
  const LineRule line = gauss_line(L.quadrature_points());
  double mu2 = 0.0;
  for (int k = 0; k < L.interface().n_segments(); ++k) {
    const InterfaceSegment& seg = L.interface().segments[k];
    const double h = seg.length();
    for (int q = 0; q < line.size(); ++q) {
      const double sq = line.points[q];
      const Point2 X = seg.a + sq * (seg.b - seg.a);
      const double en = L.value(s.mu.n, k, sq) - ex_.robin_n(t, X);
      const double et2 = L.value(s.mu.tau, k, sq) - ex_.robin_t(t, X);
      mu2 += line.weights[q] * h * (en * en + et2 * et2);
    }
  }

  acc_.u_f = std::max(acc_.u_f, std::hypot(uf.l2, uf.h1_semi));
  acc_.p_f += pf.l2 * pf.l2;
  acc_.u_p += up.l2 * up.l2 + up.div * up.div;
  acc_.p_p = std::max(acc_.p_p, pp.l2);
  acc_.eta = std::max(acc_.eta, std::hypot(et.l2, et.h1_semi));
  acc_.dt_eta = std::max(acc_.dt_eta, de.l2);
  acc_.mu = std::max(acc_.mu, std::sqrt(mu2));
}

ErrorRow ErrorAccumulator::result() const {
  ErrorRow r = acc_;
  r.p_f = std::sqrt(dt_ * acc_.p_f);
  r.u_p = std::sqrt(dt_ * acc_.u_p);
  return r;
}

ErrorRow example1_run(const std::shared_ptr<const Discretization>& d, const ManufacturedSolution& ex, double dt,
                      const Example1RunOptions& opt) {
  SchemeContext ctx(d, example1_problem(ex, opt.flux_sides), dt);
  ErrorAccumulator acc(*d, ex, dt);
  std::vector<StepObserver> observers = opt.observers;
  observers.push_back([&](const CoupledState& s, const StepRecord& r) {
    if (r.step > 0) acc.add(s);
  });
  const RunSummary sum = run(ctx, example1_initial_state(*d, ex), opt.T, opt.run, observers);
  ErrorRow row = acc.result();
  row.average_iterations = sum.average_iterations;
  return row;
}

std::vector<std::array<double, ErrorRow::n_norms>> ConvergenceTable::rates() const {
  std::vector<std::array<double, ErrorRow::n_norms>> out;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    std::array<double, ErrorRow::n_norms> r{};
    const double ratio = std::log(rows[k].dt / rows[k + 1].dt);
    for (int i = 0; i < ErrorRow::n_norms; ++i) r[i] = std::log(rows[k].norm(i) / rows[k + 1].norm(i)) / ratio;
    out.push_back(r);
  }
  return out;
}

ConvergenceTable convergence_study(const Example1Setup& setup, const std::vector<double>& dts, const RunOptions& run,
                                   double T) {
  auto [fluid, poro] = example1_meshes(setup.n);
  const auto d = make_discretization(std::move(fluid), std::move(poro), setup.darcy);
  const ManufacturedSolution ex(setup.params);
  ConvergenceTable table;
  Example1RunOptions opt;
  opt.run = run;
  opt.T = T;
  opt.flux_sides = setup.flux_sides;
  for (double dt : dts) table.rows.push_back(example1_run(d, ex, dt, opt));
  return table;
}

void write_convergence_csv(std::ostream& os, const ConvergenceTable& table) {
  const auto rates = table.rates();
  const auto old_prec = os.precision(17);
  os << "dt";
  for (int i = 0; i < ErrorRow::n_norms; ++i) os << ",err_" << ErrorRow::norm_name(i);
  for (int i = 0; i < ErrorRow::n_norms; ++i) os << ",rate_" << ErrorRow::norm_name(i);
  os << ",avg_iterations\n";
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const ErrorRow& r = table.rows[k];
    os << r.dt;
    for (int i = 0; i < ErrorRow::n_norms; ++i) os << ',' << r.norm(i);
    for (int i = 0; i < ErrorRow::n_norms; ++i) {
      os << ',';
      if (k > 0) os << rates[k - 1][i];
    }
    os << ',' << r.average_iterations << '\n';
  }
  os.precision(old_prec);
}

double PulseBC::operator()(double t) const {
  if (t < 0.0 || t > T_max) return 0.0;
  return 0.5 * P_max * (1.0 - std::cos(2.0 * pi * t / T_max));
}

PhysicalParams example2_params() {
  PhysicalParams p;
  p.rho_p = 1.1;
  p.rho_f = 1.0;
  p.mu_f = 0.035;
  p.beta = 4e6;
  p.s0 = 1e-3;
  p.K = 1e-6 * Eigen::Matrix2d::Identity();
  p.mu_p = 5.575e5;
  p.lambda_p = 1.7e6;
  p.alpha_BJS = 1.0;
  p.alpha = 1.0;
  p.gamma_f = 1000.0;
  p.gamma_p = 1000.0;
  p.gamma_BJS = 0.0;
  return p;
}

std::pair<TriMesh, TriMesh> example2_meshes(const Example2Setup& s) {
  if (s.nx < 1 || s.ny_fluid < 1 || s.ny_wall < 1) throw std::invalid_argument("example2_meshes: bad resolution");
  using namespace predicates;
  constexpr double L = 6.0, R = 0.5, wall = 0.1;
  TriMesh fluid =
      tag_boundaries(build_rect_mesh(0.0, L, 0.0, R, s.nx, s.ny_fluid, DiagonalRule::LowerLeft, DomainLabel::Fluid),
                     {{on_line_y(0.0), BoundaryTag::FluidSymmetry},
                      {on_line_y(R), BoundaryTag::Interface},
                      {on_line_x(0.0), BoundaryTag::FluidInflow},
                      {on_line_x(L), BoundaryTag::FluidOutflow}});
  TriMesh poro = tag_boundaries(
      build_rect_mesh(0.0, L, R, R + wall, s.nx, s.ny_wall, DiagonalRule::LowerLeft, DomainLabel::Poroelastic),
      {{on_line_y(R), BoundaryTag::Interface},
       {on_line_y(R + wall), BoundaryTag::PoroExternal},
       {on_line_x(0.0), BoundaryTag::PoroDispDirichlet},
       {on_line_x(L), BoundaryTag::PoroDispDirichlet}});
  return {std::move(fluid), std::move(poro)};
}

CoupledProblem example2_problem(const Example2Setup& s) {
  CoupledProblem pb;
  pb.params = s.params;
  if (s.honor_bjs) pb.params.gamma_BJS = pb.params.bjs_from_alpha(1.0, 0.0);
  pb.fluid_bc.normal_zero = {BoundaryTag::FluidSymmetry};
  const PulseBC pulse = s.pulse;
  pb.stokes.traction = [pulse](double t, Point2, Point2 n, BoundaryTag tag) -> std::array<double, 2> {
    if (tag != BoundaryTag::FluidInflow) return {0.0, 0.0};
    const double p = pulse(t);
    return {-p * n.x, -p * n.y};
  };
  // Clamped, drained ends; the outer wall is free in the normal direction at zero pore pressure.
  pb.poro_bc.displacement = {BoundaryTag::PoroDispDirichlet};
  pb.poro_bc.flux = {BoundaryTag::PoroDispDirichlet};
  pb.poro_bc.tangential_displacement = {BoundaryTag::PoroExternal};
  pb.poro_bc.pressure = {BoundaryTag::PoroExternal};
  return pb;
}

InterfaceSlice sample_interface(const Discretization& d, const CoupledState& s) {
  const LambdaSpace& L = *d.lambda;
  const int m = L.interface().n_segments();
  InterfaceSlice out;
  out.t = s.t;
  const auto at = [&](const DofMap& V, InterfaceSide side, const Eigen::VectorXd& x, int k, Point2 X) {
    const auto [cell, xh] = L.locate(V, side, k, X);
    return V.eval_field(x, cell, xh).value;
  };
  for (int i = 0; i < L.n_dofs(); ++i) {
    const Point2 X = L.node_point(i);
    const int k = std::min(i / 2, m - 1);
    out.x.push_back(X.x);
    out.p_f.push_back(at(*d.fluid_pressure, InterfaceSide::Fluid, s.p_f, k, X)[0]);
    out.u_f_y.push_back(at(*d.fluid_velocity, InterfaceSide::Fluid, s.u_f, k, X)[1]);
    out.u_p_y.push_back(at(*d.darcy_velocity, InterfaceSide::Poro, s.u_p, k, X)[1]);
    out.eta_y.push_back(at(*d.displacement, InterfaceSide::Poro, s.eta, k, X)[1]);
  }
  return out;
}

void write_slice_csv(std::ostream& os, const InterfaceSlice& slice) {
  const auto old_prec = os.precision(17);
  os << "t,x,p_f,u_f_y,u_p_y,eta_y\n";
  for (std::size_t i = 0; i < slice.x.size(); ++i) {
    os << slice.t << ',' << slice.x[i] << ',' << slice.p_f[i] << ',' << slice.u_f_y[i] << ',' << slice.u_p_y[i]
       << ',' << slice.eta_y[i] << '\n';
  }
  os.precision(old_prec);
}

Example2Result example2_run(const std::shared_ptr<const Discretization>& d, const Example2Setup& setup, double dt,
                            double T, const RunOptions& run_opt, const std::vector<double>& slice_times,
                            std::vector<StepObserver> observers) {
  SchemeContext ctx(d, example2_problem(setup), dt);
  Example2Result res;
  std::vector<int> wanted;
  for (double t : slice_times) wanted.push_back(static_cast<int>(std::lround(t / dt)));
  observers.push_back([&](const CoupledState& s, const StepRecord& r) {
    if (std::find(wanted.begin(), wanted.end(), r.step) != wanted.end()) res.slices.push_back(sample_interface(*d, s));
  });
  res.summary = run(ctx, zero_state(*d), T, run_opt, observers);
  return res;
}

namespace {

void write_vtk_geometry(std::ostream& os, const TriMesh& mesh, const std::string& title) {
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.n_vertices() << " double\n";
  for (const Point2& p : mesh.vertices) os << p.x << ' ' << p.y << " 0\n";
  os << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles() << '\n';
  for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << mesh.n_triangles() << '\n';
  for (int c = 0; c < mesh.n_triangles(); ++c) os << "5\n";
}

// P2 vector field: vertex nodes come first in each component block.
void write_vertex_vector(std::ostream& os, const DofMap& V, const Eigen::VectorXd& x, const char* name) {
  const int nn = V.n_scalar_nodes();
  os << "VECTORS " << name << " double\n";
  for (int v = 0; v < V.mesh().n_vertices(); ++v) os << x[v] << ' ' << x[nn + v] << " 0\n";
}

}  // namespace

void write_fluid_vtk(std::ostream& os, const Discretization& d, const CoupledState& s) {
  const auto old_prec = os.precision(17);
  const TriMesh& mesh = *d.fluid_mesh;
  write_vtk_geometry(os, mesh, "fluid t=" + std::to_string(s.t));
  os << "POINT_DATA " << mesh.n_vertices() << '\n';
  write_vertex_vector(os, *d.fluid_velocity, s.u_f, "u_f");
  os << "SCALARS p_f double 1\nLOOKUP_TABLE default\n";
  for (int v = 0; v < mesh.n_vertices(); ++v) os << s.p_f[v] << '\n';
  os.precision(old_prec);
}

void write_poro_vtk(std::ostream& os, const Discretization& d, const CoupledState& s) {
  const auto old_prec = os.precision(17);
  const TriMesh& mesh = *d.poro_mesh;
  write_vtk_geometry(os, mesh, "poro t=" + std::to_string(s.t));
  os << "POINT_DATA " << mesh.n_vertices() << '\n';
  write_vertex_vector(os, *d.displacement, s.eta, "eta");
  write_vertex_vector(os, *d.displacement, s.dt_eta, "dt_eta");
  os << "CELL_DATA " << mesh.n_triangles() << '\n';
  const std::array<double, 2> centroid{1.0 / 3.0, 1.0 / 3.0};
  os << "VECTORS u_p double\n";
  for (int c = 0; c < mesh.n_triangles(); ++c) {
    const Vec2 v = as_vec(d.darcy_velocity->eval_field(s.u_p, c, centroid).value);
    os << v[0] << ' ' << v[1] << " 0\n";
  }
  os << "SCALARS p_p double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < mesh.n_triangles(); ++c) os << d.darcy_pressure->eval_field(s.p_p, c, centroid).value[0] << '\n';
  os.precision(old_prec);
}

}  // namespace fpsi
