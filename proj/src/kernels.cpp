#include "homog/kernels.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "homog/error.hpp"

namespace homog {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMassDirections = 64;

QuadratureResult segment_integral(const ScalarFunction& f, double lo, double hi, double rel_tol) {
  if (!(hi > lo)) return {};
  double err = 0.0;
  const double est = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 0, 0.0, &err);
  const double abs_tol = std::max(rel_tol * std::abs(est), 1e-300);
  return composite_gauss_kronrod(f, lo, hi, abs_tol, 20);
}

void accumulate(QuadratureResult& into, const QuadratureResult& part) {
  into.value += part.value;
  into.error += part.error;
  into.converged = into.converged && part.converged;
}

// int_a^inf h(r) dr where h(r) ~ r^{-1-alpha} beyond the tail radius:
// composite panels between breakpoints below M, then the tail routine.
QuadratureResult radial_line(const ScalarFunction& h, double a, const JumpKernel& kernel, double rel_tol,
                             const std::function<QuadratureResult(double, double)>* tail) {
  const double M = kernel.tail_radius();
  std::vector<double> cuts{a};
  for (double b : kernel.breakpoints()) {
    if (b > a && b < M) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  QuadratureResult out;
  if (a < M) {
    cuts.push_back(M);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) accumulate(out, segment_integral(h, cuts[i], cuts[i + 1], rel_tol));
  }
  const double start = std::max(a, M);
  if (tail != nullptr && *tail) {
    accumulate(out, (*tail)(start, rel_tol));
  } else {
    TailOptions opt;
    opt.rel_tol = rel_tol;
    accumulate(out, integrate_power_tail(h, start, kernel.alpha(), kernel.slowly_varying_function(), opt));
  }
  return out;
}

// int_{|z| > a, z/|z| = s} p(z) |z|^{d-1} d|z| for a generic kernel.
QuadratureResult ray_integral(const JumpKernel& kernel, const Point& s, double a, double rel_tol) {
  const int d = kernel.dim();
  const ScalarFunction h = [&](double r) {
    const double v = kernel(r * s);
    return d == 2 ? v * r : v;
  };
  return radial_line(h, a, kernel, rel_tol, nullptr);
}

// int_a^inf g(r) r^{d-1} dr for a kernel with product structure (unscaled).
QuadratureResult profile_integral(const JumpKernel& kernel, double a, double rel_tol) {
  const auto& rs = *kernel.radial_structure();
  const int d = kernel.dim();
  const ScalarFunction h = [&](double r) {
    const double v = rs.profile(r);
    return d == 2 ? v * r : v;
  };
  return radial_line(h, a, kernel, rel_tol, &rs.radial_tail);
}

// int_Omega a(s) ds for the raw angular factor.
double angular_factor_integral(const JumpKernel& kernel, const Sector& omega) {
  const auto& factor = kernel.radial_structure()->angular_factor;
  if (kernel.dim() == 1) {
    double s = 0.0;
    if (omega.contains(0.0)) s += factor({1.0, 0.0});
    if (omega.contains(kPi)) s += factor({-1.0, 0.0});
    return s;
  }
  const ScalarFunction g = [&](double t) { return factor(unit_vector(t)); };
  if (omega.width() >= 2.0 * kPi) {
    double s = 0.0;
    for (int i = 0; i < kMassDirections; ++i) s += g(2.0 * kPi * i / kMassDirections);
    return s * 2.0 * kPi / kMassDirections;
  }
  return segment_integral(g, omega.from, omega.to, 1e-14).value;
}

// Sum over the angular part of a generic kernel: counting measure in d = 1,
// trapezoid for the full circle and composite Gauss-Kronrod on arcs in d = 2.
QuadratureResult generic_sector_integral(const JumpKernel& kernel, const Sector& omega, double a, double rel_tol) {
  QuadratureResult out;
  if (kernel.dim() == 1) {
    if (omega.contains(0.0)) accumulate(out, ray_integral(kernel, {1.0, 0.0}, a, rel_tol));
    if (omega.contains(kPi)) accumulate(out, ray_integral(kernel, {-1.0, 0.0}, a, rel_tol));
    return out;
  }
  if (omega.width() >= 2.0 * kPi) {
    std::vector<QuadratureResult> rays(kMassDirections);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < kMassDirections; ++i) {
      rays[static_cast<std::size_t>(i)] =
          ray_integral(kernel, unit_vector(2.0 * kPi * i / kMassDirections), a, rel_tol);
    }
    double full = 0.0;
    double half = 0.0;
    for (int i = 0; i < kMassDirections; ++i) {
      const auto& r = rays[static_cast<std::size_t>(i)];
      full += r.value;
      if (i % 2 == 0) half += r.value;
      out.error += r.error;
      out.converged = out.converged && r.converged;
    }
    const double w = 2.0 * kPi / kMassDirections;
    out.value = full * w;
    out.error = out.error * w + std::abs(full * w - half * 2.0 * w);
    return out;
  }
  bool converged = true;
  const ScalarFunction g = [&](double t) {
    const auto r = ray_integral(kernel, unit_vector(t), a, rel_tol);
    converged = converged && r.converged;
    return r.value;
  };
  out = segment_integral(g, omega.from, omega.to, rel_tol);
  out.converged = out.converged && converged;
  return out;
}

QuadratureResult sector_mass(const JumpKernel& kernel, const Sector& omega, double a, double rel_tol) {
  if (kernel.radial_structure()) {
    const double ang = angular_factor_integral(kernel, omega);
    QuadratureResult radial = profile_integral(kernel, a, rel_tol);
    radial.value *= kernel.scale() * ang;
    radial.error *= kernel.scale() * std::abs(ang);
    return radial;
  }
  return generic_sector_integral(kernel, omega, a, rel_tol);
}

}  // namespace

bool Sector::contains(double theta) const {
  if (width() >= 2.0 * kPi) return true;
  double t = std::fmod(theta - from, 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  return t < width();
}

AngularDensity::AngularDensity(int dim, Evaluator k, double beta1, double beta2)
    : dim_(dim), k_(std::move(k)), beta1_(beta1), beta2_(beta2) {
  check_dimension(dim);
  if (!k_) throw InvalidArgument("angular density needs an evaluator");
  if (!(beta1 > 0.0) || beta2 < beta1) throw InvalidArgument("angular bounds need 0 < beta1 <= beta2");
}

AngularDensity AngularDensity::scaled(double factor) const {
  AngularDensity out = *this;
  out.scale_ *= factor;
  return out;
}

double AngularDensity::integral(const Sector& omega) const {
  if (dim_ == 1) {
    double s = 0.0;
    if (omega.contains(0.0)) s += (*this)({1.0, 0.0});
    if (omega.contains(kPi)) s += (*this)({-1.0, 0.0});
    return s;
  }
  const ScalarFunction g = [&](double t) { return at_angle(t); };
  if (omega.width() >= 2.0 * kPi) {
    // Periodic trapezoid, refined until it stops moving.
    double prev = 0.0;
    for (int n = 16;; n *= 2) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += g(2.0 * kPi * i / n);
      s *= 2.0 * kPi / n;
      if ((n > 16 && std::abs(s - prev) <= 1e-14 * std::abs(s)) || n >= 1 << 16) return s;
      prev = s;
    }
  }
  return segment_integral(g, omega.from, omega.to, 1e-14).value;
}

std::string_view to_string(TailMode mode) { return mode == TailMode::Plain ? "plain" : "slowly-varying"; }

JumpKernel::JumpKernel(int dim, double alpha, Evaluator density, double beta1, double beta2, double tail_radius,
                       AngularDensity angular, TailMode mode, ScalarFunction slowly_varying)
    : dim_(dim),
      alpha_(alpha),
      density_(std::move(density)),
      beta1_(beta1),
      beta2_(beta2),
      tail_radius_(tail_radius),
      angular_(std::move(angular)),
      mode_(mode),
      slowly_varying_(std::move(slowly_varying)) {
  check_dimension(dim);
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("stability index alpha must lie in (0, 2)");
  if (!density_) throw InvalidArgument("jump kernel needs a density evaluator");
  if (!(beta1 > 0.0) || beta2 < beta1) throw InvalidArgument("tail constants need 0 < beta1 <= beta2");
  if (!(tail_radius >= 1.0)) throw InvalidArgument("tail radius M must be >= 1");
  if (angular_.dim() != dim) throw InvalidArgument("angular density dimension differs from kernel dimension");
  if (mode == TailMode::SlowlyVarying && !slowly_varying_) {
    throw InvalidArgument("slowly varying mode needs an evaluator L(r)");
  }
  if (mode == TailMode::Plain) slowly_varying_ = {};
  breakpoints_ = {tail_radius};
}

JumpKernel JumpKernel::scaled(double factor) const {
  if (!(factor > 0.0)) throw InvalidArgument("kernel scale factor must be positive");
  JumpKernel out = *this;
  out.scale_ *= factor;
  out.angular_ = angular_.scaled(factor);
  out.normalized_ = false;
  return out;
}

JumpKernel JumpKernel::as_normalized(double factor) const {
  JumpKernel out = scaled(factor);
  out.normalized_ = true;
  return out;
}

JumpKernel JumpKernel::with_radial_structure(RadialStructure structure) const {
  JumpKernel out = *this;
  out.radial_ = std::move(structure);
  return out;
}

JumpKernel JumpKernel::with_description(Description d) const {
  JumpKernel out = *this;
  out.description_ = std::move(d);
  return out;
}

JumpKernel JumpKernel::with_breakpoints(std::vector<double> radii) const {
  JumpKernel out = *this;
  radii.push_back(tail_radius_);
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  out.breakpoints_ = std::move(radii);
  return out;
}

const std::vector<std::string>& builtin_kernel_families() {
  static const std::vector<std::string> names{"pareto", "anisotropic-pareto", "log-perturbed", "oscillation-violator"};
  return names;
}

JumpKernel make_builtin_kernel(std::string_view family, int dim, double alpha, const KernelParams& params) {
  check_dimension(dim);
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("stability index alpha must lie in (0, 2)");
  const double r0 = params.inner_radius;
  if (!(r0 > 0.0)) throw InvalidArgument("inner radius r0 must be positive");
  const double noise = params.core_noise;
  if (!(std::abs(noise) < 1.0)) throw InvalidArgument("core_noise amplitude must satisfy |a| < 1");
  const double M = std::max(1.0, r0);
  const double e = dim + alpha;
  const double plateau = std::pow(r0, -e);
  // Even (radial) perturbation of the plateau; identity when noise == 0.
  const auto core = [r0, noise](double r) { return 1.0 + noise * std::cos(6.0 * kPi * r / r0); };

  JumpKernel::Description desc;
  desc.family = std::string(family);
  desc.params["inner_radius"] = r0;
  if (noise != 0.0) desc.params["core_noise"] = noise;

  ScalarFunction profile;
  AngularDensity::Evaluator factor = [](const Point&) { return 1.0; };
  std::function<QuadratureResult(double, double)> tail;
  double beta1 = 1.0;
  double beta2 = 1.0;
  double k_level = 1.0;
  double k_lo = 1.0;
  double k_hi = 1.0;
  TailMode mode = TailMode::Plain;
  ScalarFunction slow;

  if (family == "pareto" || family == "anisotropic-pareto") {
    profile = [=](double r) { return r < r0 ? core(r) * plateau : std::pow(r, -e); };
    tail = [alpha](double R, double) { return QuadratureResult{std::pow(R, -alpha) / alpha, 0.0, true}; };
    if (family == "anisotropic-pareto") {
      if (dim != 2) throw InvalidArgument("anisotropic-pareto requires d = 2");
      const double b = params.anisotropy;
      if (!(std::abs(b) < 1.0)) throw InvalidArgument("anisotropy b must satisfy |b| < 1");
      desc.params["anisotropy"] = b;
      // cos(2 theta) written in Cartesian form so that a(-s) == a(s) bit for bit.
      factor = [b](const Point& s) {
        const double rr = s[0] * s[0] + s[1] * s[1];
        return rr > 0.0 ? 1.0 + b * (s[0] * s[0] - s[1] * s[1]) / rr : 1.0;
      };
      beta1 = k_lo = 1.0 - std::abs(b);
      beta2 = k_hi = 1.0 + std::abs(b);
    }
  } else if (family == "log-perturbed") {
    slow = [](double r) { return std::log(std::numbers::e + r); };
    const double l0 = slow(r0);
    profile = [=](double r) { return r < r0 ? core(r) * l0 * plateau : slow(r) * std::pow(r, -e); };
    tail = [alpha, slow](double R, double) {
      return QuadratureResult{power_tail_weight(R, alpha, &slow), 0.0, true};
    };
    mode = TailMode::SlowlyVarying;
  } else if (family == "oscillation-violator") {
    const double s0 = 2.0 + std::sin(r0);
    profile = [=](double r) { return r < r0 ? core(r) * s0 * plateau : (2.0 + std::sin(r)) * std::pow(r, -e); };
    // g(r) r^{d-1} = (2 + sin r) r^{-1-alpha} in either dimension.
    tail = [alpha](double R, double) {
      QuadratureResult osc = oscillatory_power_integral(1.0, 0.0, R, 1.0 + alpha);
      osc.value += 2.0 * std::pow(R, -alpha) / alpha;
      return osc;
    };
    beta1 = 1.0;
    beta2 = 3.0;
    k_level = k_lo = k_hi = 2.0;
  } else {
    throw InvalidArgument("unknown kernel family '" + std::string(family) + "'");
  }

  AngularDensity::Evaluator k_eval = [factor, k_level](const Point& s) { return k_level * factor(s); };
  AngularDensity angular(dim, k_eval, k_lo, k_hi);
  JumpKernel::Evaluator density = [dim, factor, profile](const Point& z) {
    const double r = dim == 1 ? std::abs(z[0]) : norm(z);
    const double a = dim == 1 ? 1.0 : factor(z);
    return a * profile(r);
  };
  JumpKernel raw(dim, alpha, std::move(density), beta1, beta2, M, std::move(angular), mode, std::move(slow));
  raw = raw.with_breakpoints({r0})
            .with_radial_structure({factor, profile, tail})
            .with_description(std::move(desc));
  return normalize(raw);
}

double default_normalization_tolerance(int dim) { return dim == 1 ? 1e-10 : 1e-7; }

QuadratureResult total_mass(const JumpKernel& kernel, double rel_tol) {
  return sector_mass(kernel, Sector::full(), 0.0, rel_tol);
}

JumpKernel normalize(const JumpKernel& kernel, std::optional<double> tolerance) {
  const double tol = tolerance.value_or(default_normalization_tolerance(kernel.dim()));
  const QuadratureResult mass = total_mass(kernel, std::min(1e-13, tol * 1e-3));
  if (!mass.converged || !(mass.error <= tol * std::abs(mass.value))) {
    throw QuadratureError("kernel mass quadrature did not reach tolerance " + std::to_string(tol),
                          mass.error / std::abs(mass.value));
  }
  if (!(mass.value > 0.0)) throw QuadratureError("kernel mass is not positive", mass.error);
  return kernel.as_normalized(1.0 / mass.value);
}

TailMassResult tail_mass(const JumpKernel& kernel, double n, const Sector& omega, std::optional<TailMode> target_mode,
                         double rel_tol) {
  if (!(n >= kernel.tail_radius())) throw InvalidArgument("tail_mass needs n >= M");
  const TailMode mode = target_mode.value_or(kernel.mode());
  TailMassResult out;
  const QuadratureResult q = sector_mass(kernel, omega, n, rel_tol);
  out.mass = q.value;
  out.error = q.error;
  out.converged = q.converged;
  const double alpha = kernel.alpha();
  out.target = kernel.angular().integral(omega) / (alpha * std::pow(n, alpha));
  if (mode == TailMode::SlowlyVarying) out.target *= kernel.slowly_varying(n);
  out.ratio = out.target > 0.0 ? out.mass / out.target : 0.0;
  return out;
}

double default_shift_radius(int dim) { return 2.0 * std::sqrt(static_cast<double>(dim)); }

std::vector<double> oscillation_profile(const JumpKernel& kernel, double K, const std::vector<double>& radii,
                                        const OscillationBudget& budget) {
  if (!(K > 0.0)) throw InvalidArgument("shift radius K must be positive");
  if (!(budget.r_min > 0.0) || !(budget.r_max > budget.r_min)) throw InvalidArgument("need 0 < r_min < r_max");
  const int d = kernel.dim();

  std::mt19937_64 rng(budget.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> zr;
  const double octaves = std::log2(budget.r_max / budget.r_min);
  const int nr = static_cast<int>(std::ceil(octaves * budget.radial_per_octave));
  for (int j = 0; j <= nr; ++j) {
    const double t = std::min((j + unit(rng)) / budget.radial_per_octave, octaves);
    zr.push_back(budget.r_min * std::exp2(t));
  }
  std::vector<Point> zs;
  if (d == 1) {
    for (double r : zr) {
      zs.push_back({r, 0.0});
      zs.push_back({-r, 0.0});
    }
  } else {
    const double phase = unit(rng);
    for (double r : zr) {
      for (int i = 0; i < budget.angular; ++i) zs.push_back(r * unit_vector(2.0 * kPi * (i + phase) / budget.angular));
    }
  }
  std::vector<Point> shifts;
  const int J = static_cast<int>(std::floor(K / budget.shift_step + 1e-9));
  if (d == 1) {
    for (int j = -J; j <= J; ++j) {
      if (j != 0) shifts.push_back({j * budget.shift_step, 0.0});
    }
  } else {
    for (int j = 1; j <= J; ++j) {
      for (int i = 0; i < budget.shift_angular; ++i) {
        shifts.push_back((j * budget.shift_step) * unit_vector(2.0 * kPi * i / budget.shift_angular));
      }
    }
  }

  std::vector<double> worst(zs.size(), 0.0);
  std::vector<int> bad(zs.size(), 0);
  const auto nz = static_cast<std::ptrdiff_t>(zs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < nz; ++i) {
    const Point& z = zs[static_cast<std::size_t>(i)];
    const double pz = kernel(z);
    if (!(pz > 0.0)) {
      bad[static_cast<std::size_t>(i)] = 1;
      continue;
    }
    double m = 0.0;
    for (const Point& g : shifts) m = std::max(m, std::abs(kernel(z + g) - pz) / pz);
    worst[static_cast<std::size_t>(i)] = m;
  }

  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) {
    double phi = 0.0;
    for (std::size_t i = 0; i < zs.size(); ++i) {
      if (norm(zs[i]) < r) continue;
      if (bad[i]) {
        throw HypothesisViolation("p(z) = 0 at sampled |z| = " + std::to_string(norm(zs[i])) +
                                  "; the oscillation ratio is undefined");
      }
      phi = std::max(phi, worst[i]);
    }
    out.push_back(phi);
  }
  return out;
}

double oscillation_phi(const JumpKernel& kernel, double K, double r, const OscillationBudget& budget) {
  return oscillation_profile(kernel, K, {r}, budget).front();
}

double rescaled_density(const JumpKernel& kernel, double eps, const Point& z) {
  const double factor = std::pow(eps, -(kernel.dim() + kernel.alpha()));
  double v = factor * kernel((1.0 / eps) * z);
  if (kernel.mode() == TailMode::SlowlyVarying) v /= kernel.slowly_varying(1.0 / eps);
  return v;
}

nlohmann::ordered_json describe(const JumpKernel& kernel) {
  nlohmann::ordered_json j;
  j["family"] = kernel.description().family;
  j["dim"] = kernel.dim();
  j["alpha"] = kernel.alpha();
  j["params"] = kernel.description().params;
  j["mode"] = std::string(to_string(kernel.mode()));
  j["tail_radius"] = kernel.tail_radius();
  j["beta1"] = kernel.beta1();
  j["beta2"] = kernel.beta2();
  j["normalized"] = kernel.normalized();
  j["scale"] = kernel.scale();
  return j;
}

}  // namespace homog
