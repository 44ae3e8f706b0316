#include "povspace/poverty_product.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "povspace/csv.hpp"
#include "povspace/error.hpp"

namespace povspace {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double ProductPovertyVector::prp(std::size_t p) const { return defined.at(p) ? 1.0 - ppi[p] : kNaN; }

std::vector<double> ProductPovertyVector::prp_for_eigen() const {
  std::vector<double> out(size());
  for (std::size_t p = 0; p < size(); ++p) out[p] = defined[p] ? 1.0 - ppi[p] : 1.0;
  return out;
}

ProductPovertyVector compute_ppi(const Eigen::MatrixXd& exports, const Eigen::MatrixXd& advantage,
                                 const std::vector<std::optional<double>>& headcounts) {
  if (exports.rows() != advantage.rows() || exports.cols() != advantage.cols()) {
    throw ComputationError("export and advantage matrices differ in shape");
  }
  if (static_cast<std::size_t>(exports.rows()) != headcounts.size()) {
    throw ComputationError("headcount vector does not match the country index");
  }
  const Eigen::Index n_products = exports.cols();
  Eigen::VectorXd numerator = Eigen::VectorXd::Zero(n_products);
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(n_products);
  bool any_country = false;
  for (Eigen::Index c = 0; c < exports.rows(); ++c) {
    const auto& h = headcounts[static_cast<std::size_t>(c)];
    const double total = exports.row(c).sum();
    if (!h || total <= 0.0) continue;
    any_country = true;
    for (Eigen::Index p = 0; p < n_products; ++p) {
      const double w = advantage(c, p) * exports(c, p) / total;
      numerator(p) += w * *h;
      weight(p) += w;
    }
  }
  if (!any_country) throw ComputationError("no country has both trade and poverty data for this year");

  ProductPovertyVector out;
  out.ppi.resize(static_cast<std::size_t>(n_products));
  out.defined.resize(static_cast<std::size_t>(n_products));
  for (Eigen::Index p = 0; p < n_products; ++p) {
    const auto i = static_cast<std::size_t>(p);
    out.defined[i] = weight(p) > 0.0;
    out.ppi[i] = out.defined[i] ? numerator(p) / weight(p) : kNaN;
  }
  return out;
}

ProductPovertyVector compute_ppi(const ExportPanel& panel, const AdvantageMatrix& advantage,
                                 const PovertyPanel& poverty, const IndexMap& countries, const IndexMap& products,
                                 int year) {
  if (!panel.has_year(year)) throw ComputationError("year " + std::to_string(year) + " absent from export panel");
  if (!poverty.years().count(year)) {
    throw ComputationError("year " + std::to_string(year) + " absent from poverty panel");
  }
  std::vector<std::optional<double>> h(countries.size());
  for (std::size_t c = 0; c < countries.size(); ++c) h[c] = poverty.headcount(countries.code(c), year);
  return compute_ppi(panel.matrix(countries, products, year), advantage.values, h);
}

ProductPovertyVector average_ppi(const std::vector<ProductPovertyVector>& yearly) {
  if (yearly.empty()) throw ComputationError("empty year range");
  const std::size_t n = yearly.front().size();
  ProductPovertyVector out;
  out.ppi.assign(n, kNaN);
  out.defined.assign(n, false);
  for (std::size_t p = 0; p < n; ++p) {
    double sum = 0.0;
    int count = 0;
    for (const auto& y : yearly) {
      if (y.size() != n) throw ComputationError("yearly PPI vectors differ in length");
      if (y.defined[p]) {
        sum += y.ppi[p];
        ++count;
      }
    }
    if (count > 0) {
      out.ppi[p] = sum / count;
      out.defined[p] = true;
    }
  }
  return out;
}

ProductPovertyVector average_ppi(const ExportPanel& panel, const PovertyPanel& poverty, const IndexMap& countries,
                                 const IndexMap& products, int first_year, int last_year, double tau) {
  if (first_year > last_year) throw ComputationError("empty year range");
  std::vector<ProductPovertyVector> yearly;
  for (int y = first_year; y <= last_year; ++y) {
    const auto m = threshold_advantage(compute_rca(panel, countries, products, y), tau);
    yearly.push_back(compute_ppi(panel, m, poverty, countries, products, y));
  }
  return average_ppi(yearly);
}

Eigen::MatrixXd build_phi_star(const Eigen::MatrixXd& phi, std::span<const double> prp) {
  if (phi.rows() != phi.cols() || static_cast<std::size_t>(phi.rows()) != prp.size()) {
    throw ComputationError("dimension mismatch between phi (" + std::to_string(phi.rows()) + "x" +
                           std::to_string(phi.cols()) + ") and PRP vector (" + std::to_string(prp.size()) + ")");
  }
  const Eigen::Map<const Eigen::VectorXd> scale(prp.data(), static_cast<Eigen::Index>(prp.size()));
  return scale.asDiagonal() * phi;
}

std::vector<std::size_t> largest_component(const Eigen::MatrixXd& a) {
  const auto n = static_cast<std::size_t>(a.rows());
  std::vector<int> label(n, -1);
  std::vector<std::size_t> best;
  int next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    std::vector<std::size_t> members;
    std::vector<std::size_t> stack{s};
    label[s] = next;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      members.push_back(u);
      for (std::size_t v = 0; v < n; ++v) {
        const auto ui = static_cast<Eigen::Index>(u);
        const auto vi = static_cast<Eigen::Index>(v);
        if (label[v] < 0 && (a(ui, vi) > 0.0 || a(vi, ui) > 0.0)) {
          label[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
    // Components are discovered in order of their smallest member, so a strict
    // comparison keeps the earliest one on ties.
    if (members.size() > best.size()) best = std::move(members);
  }
  std::sort(best.begin(), best.end());
  return best;
}

EigenpovertyVector solve_eigenpoverty(const Eigen::MatrixXd& phi_star, const EigenOptions& options) {
  if (phi_star.rows() != phi_star.cols()) throw ComputationError("Phi* must be square");
  if ((phi_star.array() < 0.0).any() || !phi_star.allFinite()) throw ComputationError("Phi* must be non-negative");
  if (!(options.damping >= 0.0 && options.damping <= 1.0)) throw ComputationError("damping must lie in [0, 1]");
  if (options.max_iterations <= 0 || !(options.tolerance > 0.0)) throw ComputationError("invalid iteration options");

  const auto n = static_cast<std::size_t>(phi_star.rows());
  Eigen::MatrixXd a = options.transpose ? Eigen::MatrixXd(phi_star.transpose()) : phi_star;
  if (n == 0 || (a.array() == 0.0).all()) throw ComputationError("no positive eigenvalue: Phi* is the zero matrix");

  std::vector<std::size_t> component;
  if (options.damping > 0.0) {
    a.array() += options.damping / static_cast<double>(n);
    component.resize(n);
    std::iota(component.begin(), component.end(), std::size_t{0});
  } else {
    component = largest_component(a);
  }
  const auto k = static_cast<Eigen::Index>(component.size());
  Eigen::MatrixXd sub(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      sub(i, j) = a(static_cast<Eigen::Index>(component[static_cast<std::size_t>(i)]),
                    static_cast<Eigen::Index>(component[static_cast<std::size_t>(j)]));
    }
  }

  // A diagonal shift keeps the eigenvectors and makes the Perron root strictly
  // dominant even when the component is periodic (e.g. bipartite).
  const double shift = 0.5 * sub.rowwise().sum().maxCoeff();
  if (!(shift > 0.0)) throw ComputationError("no positive eigenvalue: largest component has no weight");

  Eigen::VectorXd v = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  Eigen::VectorXd next(k);
  double change = std::numeric_limits<double>::infinity();
  int iter = 0;
  while (iter < options.max_iterations) {
    next.noalias() = sub * v;
    next += shift * v;
    next /= next.sum();
    change = (next - v).lpNorm<1>();
    v.swap(next);
    ++iter;
    if (change < options.tolerance) break;
  }

  const Eigen::VectorXd av = sub * v;
  const double eigenvalue = av.sum();  // v sums to 1
  const double residual = (av - eigenvalue * v).lpNorm<1>();
  if (!(eigenvalue > 1e-14 * shift)) {
    throw ComputationError("no positive eigenvalue: the analysed component is nilpotent");
  }
  if (change >= options.tolerance) {
    throw ComputationError("power iteration did not converge in " + std::to_string(options.max_iterations) +
                           " iterations (last step " + csv::format_number(change) + ", residual " +
                           csv::format_number(residual) + ")");
  }

  EigenpovertyVector out;
  out.e_prime.assign(n, 0.0);
  out.in_component.assign(n, false);
  for (std::size_t i = 0; i < component.size(); ++i) {
    out.e_prime[component[i]] = std::max(0.0, v(static_cast<Eigen::Index>(i)));
    out.in_component[component[i]] = true;
  }
  const double total = std::accumulate(out.e_prime.begin(), out.e_prime.end(), 0.0);
  for (auto& x : out.e_prime) x /= total;
  out.e.resize(n);
  for (std::size_t p = 0; p < n; ++p) out.e[p] = 1.0 - out.e_prime[p];
  out.eigenvalue = eigenvalue;
  out.iterations = iter;
  out.residual = residual;
  return out;
}

std::vector<double> average_eigenpoverty(const std::vector<EigenpovertyVector>& yearly) {
  if (yearly.empty()) throw ComputationError("empty year range");
  const std::size_t n = yearly.front().e.size();
  std::vector<double> out(n, 0.0);
  for (const auto& y : yearly) {
    if (y.e.size() != n) throw ComputationError("yearly Eigenpoverty vectors differ in length");
    for (std::size_t p = 0; p < n; ++p) out[p] += y.e[p];
  }
  for (auto& x : out) x /= static_cast<double>(yearly.size());
  return out;
}

}  // namespace povspace
