#include "rmtk/distribution.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "rmtk/errors.hpp"
#include "rmtk/matrix_io.hpp"

namespace rmtk {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Splits on commas that are not nested inside brackets.
std::vector<std::string> split_top_level(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '[' || c == '(') ++depth;
    if (c == ']' || c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(strip(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!strip(cur).empty() || !out.empty()) out.push_back(strip(cur));
  return out;
}

std::string unbracket(const std::string& s) {
  const std::string t = strip(s);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
    throw ValidationError("expected a bracketed list, got '" + t + "'");
  }
  return t.substr(1, t.size() - 2);
}

double parse_real(const std::string& s) {
  const cplx z = parse_complex(s);
  if (z.imag() != 0.0) throw ValidationError("expected a real number, got '" + s + "'");
  return z.real();
}

}  // namespace

void validate(const DistributionSpec& dist) {
  std::visit(overloaded{
                 [](const ComplexGaussian& g) {
                   if (!(g.variance > 0.0) || !std::isfinite(g.variance))
                     throw ValidationError("ComplexGaussian variance must be positive");
                 },
                 [](const FourPointUniform&) {},
                 [](const RealRademacher&) {},
                 [](const LatticeUniform& l) {
                   if (l.support.empty() || l.support.size() != l.probabilities.size())
                     throw ValidationError("lattice support and probabilities must be non-empty and equal length");
                   double total = 0.0;
                   for (double p : l.probabilities) {
                     if (!(p >= 0.0)) throw ValidationError("lattice probabilities must be non-negative");
                     total += p;
                   }
                   if (std::abs(total - 1.0) > 1e-12)
                     throw ValidationError("lattice probabilities sum to " + fmt_real(total) + ", not 1");
                   for (const auto& z : l.support)
                     if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                       throw ValidationError("lattice support must be finite");
                 },
                 [](const Constant& c) {
                   if (!std::isfinite(c.value.real()) || !std::isfinite(c.value.imag()))
                     throw ValidationError("constant value must be finite");
                 },
                 [](const SparseBernoulli& s) {
                   if (!(s.p >= 0.0 && s.p <= 1.0))
                     throw ValidationError("SparseBernoulli p must lie in [0, 1]");
                   if (!std::isfinite(s.value.real()) || !std::isfinite(s.value.imag()))
                     throw ValidationError("SparseBernoulli value must be finite");
                 },
             },
             dist);
}

std::complex<double> draw(const DistributionSpec& dist, Rng& rng) {
  return std::visit(
      overloaded{
          [&](const ComplexGaussian& g) {
            const double s = std::sqrt(g.variance / 2.0);
            const double re = rng.normal();
            const double im = rng.normal();
            return std::complex<double>(s * re, s * im);
          },
          [&](const FourPointUniform&) {
            switch (rng.index(4)) {
              case 0: return std::complex<double>(1.0, 0.0);
              case 1: return std::complex<double>(-1.0, 0.0);
              case 2: return std::complex<double>(0.0, 1.0);
              default: return std::complex<double>(0.0, -1.0);
            }
          },
          [&](const RealRademacher&) {
            return std::complex<double>((rng.next() >> 63) ? 1.0 : -1.0, 0.0);
          },
          [&](const LatticeUniform& l) {
            const double u = rng.uniform();
            double acc = 0.0;
            for (std::size_t k = 0; k + 1 < l.support.size(); ++k) {
              acc += l.probabilities[k];
              if (u < acc) return l.support[k];
            }
            return l.support.back();
          },
          [&](const Constant& c) { return c.value; },
          [&](const SparseBernoulli& s) {
            const double u = rng.uniform();
            if (u < s.p / 2.0) return s.value;
            if (u < s.p) return -s.value;
            return std::complex<double>{};
          },
      },
      dist);
}

std::complex<double> sample_scalar(const DistributionSpec& dist, const SeedSpec& seed) {
  validate(dist);
  Rng rng(seed);
  return draw(dist, rng);
}

std::complex<double> draw_symmetrized(const DistributionSpec& dist, Rng& rng) {
  const auto a = draw(dist, rng);
  const auto b = draw(dist, rng);
  return a - b;
}

std::complex<double> mean(const DistributionSpec& dist) {
  return std::visit(overloaded{
                        [](const LatticeUniform& l) {
                          std::complex<double> m{};
                          for (std::size_t k = 0; k < l.support.size(); ++k)
                            m += l.probabilities[k] * l.support[k];
                          return m;
                        },
                        [](const Constant& c) { return c.value; },
                        [](const auto&) { return std::complex<double>{}; },
                    },
                    dist);
}

double second_moment(const DistributionSpec& dist) {
  return std::visit(overloaded{
                        [](const ComplexGaussian& g) { return g.variance; },
                        [](const FourPointUniform&) { return 1.0; },
                        [](const RealRademacher&) { return 1.0; },
                        [](const LatticeUniform& l) {
                          double m = 0.0;
                          for (std::size_t k = 0; k < l.support.size(); ++k)
                            m += l.probabilities[k] * std::norm(l.support[k]);
                          return m;
                        },
                        [](const Constant& c) { return std::norm(c.value); },
                        [](const SparseBernoulli& s) { return s.p * std::norm(s.value); },
                    },
                    dist);
}

DistributionSpec scaled(const DistributionSpec& dist, double s) {
  if (s == 1.0) return dist;
  return std::visit(
      overloaded{
          [&](const ComplexGaussian& g) -> DistributionSpec {
            if (s == 0.0) return Constant{0.0};
            return ComplexGaussian{g.variance * s * s};
          },
          [&](const FourPointUniform&) -> DistributionSpec {
            return LatticeUniform{{{s, 0.0}, {-s, 0.0}, {0.0, s}, {0.0, -s}}, {0.25, 0.25, 0.25, 0.25}};
          },
          [&](const RealRademacher&) -> DistributionSpec {
            return LatticeUniform{{{s, 0.0}, {-s, 0.0}}, {0.5, 0.5}};
          },
          [&](const LatticeUniform& l) -> DistributionSpec {
            LatticeUniform out = l;
            for (auto& z : out.support) z *= s;
            return out;
          },
          [&](const Constant& c) -> DistributionSpec { return Constant{c.value * s}; },
          [&](const SparseBernoulli& b) -> DistributionSpec { return SparseBernoulli{b.p, b.value * s}; },
      },
      dist);
}

std::string to_string(const DistributionSpec& dist) {
  return std::visit(
      overloaded{
          [](const ComplexGaussian& g) { return "gaussian(" + fmt_real(g.variance) + ")"; },
          [](const FourPointUniform&) { return std::string("fourpoint"); },
          [](const RealRademacher&) { return std::string("rademacher"); },
          [](const LatticeUniform& l) {
            std::ostringstream os;
            os << "lattice([";
            for (std::size_t k = 0; k < l.support.size(); ++k)
              os << (k ? ", " : "") << format_complex(l.support[k]);
            os << "], [";
            for (std::size_t k = 0; k < l.probabilities.size(); ++k)
              os << (k ? ", " : "") << fmt_real(l.probabilities[k]);
            os << "])";
            return os.str();
          },
          [](const Constant& c) { return "constant(" + format_complex(c.value) + ")"; },
          [](const SparseBernoulli& s) {
            return "sparse(" + fmt_real(s.p) + ", " + format_complex(s.value) + ")";
          },
      },
      dist);
}

DistributionSpec parse_distribution(const std::string& text) {
  const std::string t = strip(text);
  const auto open = t.find('(');
  const std::string name = strip(t.substr(0, open));
  std::vector<std::string> args;
  if (open != std::string::npos) {
    if (t.back() != ')') throw ValidationError("unbalanced parentheses in distribution '" + t + "'");
    args = split_top_level(t.substr(open + 1, t.size() - open - 2));
  }
  auto want = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi)
      throw ValidationError("wrong number of arguments for distribution '" + name + "'");
  };

  DistributionSpec out;
  if (name == "gaussian" || name == "ginibre" || name == "complex_gaussian") {
    want(0, 1);
    out = ComplexGaussian{args.empty() ? 1.0 : parse_real(args[0])};
  } else if (name == "fourpoint" || name == "four_point") {
    want(0, 0);
    out = FourPointUniform{};
  } else if (name == "rademacher") {
    want(0, 0);
    out = RealRademacher{};
  } else if (name == "constant") {
    want(1, 1);
    out = Constant{parse_complex(args[0])};
  } else if (name == "sparse") {
    want(1, 2);
    out = SparseBernoulli{parse_real(args[0]), args.size() > 1 ? parse_complex(args[1]) : 1.0};
  } else if (name == "lattice") {
    want(2, 2);
    LatticeUniform l;
    for (const auto& z : split_top_level(unbracket(args[0]))) l.support.push_back(parse_complex(z));
    for (const auto& p : split_top_level(unbracket(args[1]))) l.probabilities.push_back(parse_real(p));
    out = std::move(l);
  } else {
    throw ValidationError("unknown distribution '" + name + "'");
  }
  validate(out);
  return out;
}

}  // namespace rmtk
