#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "povspace/error.hpp"
#include "povspace/rca.hpp"

using namespace povspace;

namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

RcaMatrix wrap(Eigen::MatrixXd v) { return RcaMatrix{2010, std::move(v)}; }

}  // namespace

TEST_CASE("compute_rca: hand examples") {
  CHECK(compute_rca(mat({{10, 0}, {0, 10}})).isApprox(mat({{2, 0}, {0, 2}}), 1e-15));
  CHECK(compute_rca(mat({{6, 2}, {2, 6}})).isApprox(mat({{1.5, 0.5}, {0.5, 1.5}}), 1e-15));
  const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(3, 4, 7.0);
  CHECK((compute_rca(flat).array() - 1.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("compute_rca: zero rows and columns stay zero") {
  const auto r = compute_rca(mat({{1, 0, 2}, {0, 0, 0}, {3, 0, 1}}));
  CHECK(r.row(1).isZero());
  CHECK(r.col(1).isZero());
  CHECK(r.allFinite());
  CHECK_THROWS_AS(compute_rca(Eigen::MatrixXd::Zero(2, 2)), ComputationError);
  CHECK_THROWS_AS(compute_rca(mat({{1, -1}, {1, 1}})), ComputationError);
}

TEST_CASE("compute_rca: matches the loop oracle and is scale invariant") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = oracle::random_exports(rng, dim(rng), dim(rng));
    if (!(x.sum() > 0.0)) continue;
    const auto r = compute_rca(x);
    const auto ref = oracle::rca(oracle::to_rows(x));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) CHECK(std::abs(r(i, j) - ref[i][j]) <= 1e-12 * std::max(1.0, ref[i][j]));
    for (double k : {0.1, 7.0, 1e6}) {
      const auto scaled = compute_rca(x * k);
      CHECK((scaled - r).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, r.maxCoeff()));
    }
  }
}

TEST_CASE("compute_rca: panel overload and absent years") {
  const ExportPanel p({{"A", "1", 2010, 10}, {"B", "2", 2010, 10}}, 2000, 2020);
  const IndexMap c(p.countries()), pr(p.products());
  const auto r = compute_rca(p, c, pr, 2010);
  CHECK(r.year == 2010);
  CHECK(r.values.isApprox(mat({{2, 0}, {0, 2}})));
  CHECK_THROWS_AS(compute_rca(p, c, pr, 2011), ComputationError);
  const ExportPanel zeros({{"A", "1", 2010, 0}}, 2000, 2020);
  CHECK_THROWS_AS(compute_rca(zeros, IndexMap(zeros.countries()), IndexMap(zeros.products()), 2010),
                  ComputationError);
}

TEST_CASE("threshold_advantage: strict inequality and tau") {
  CHECK(threshold_advantage(wrap(mat({{2, 0}, {0, 2}}))).values == mat({{1, 0}, {0, 1}}));
  CHECK(threshold_advantage(wrap(mat({{1.0, 1.0000001}}))).values == mat({{0, 1}}));
  CHECK(threshold_advantage(wrap(mat({{0.6, 0.4}})), 0.5).values == mat({{1, 0}}));
  CHECK(threshold_advantage(wrap(mat({{2}}))).is_binary());
  CHECK_THROWS_AS(threshold_advantage(wrap(mat({{1}})), 0.0), ComputationError);
}

TEST_CASE("threshold_advantage: raising tau never turns a 0 into a 1") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> tau(0.1, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = wrap(compute_rca(oracle::random_exports(rng, 5, 5, 0.1) + Eigen::MatrixXd::Constant(5, 5, 1.0)));
    double t1 = tau(rng), t2 = tau(rng);
    if (t1 > t2) std::swap(t1, t2);
    const auto lo = threshold_advantage(r, t1).values, hi = threshold_advantage(r, t2).values;
    CHECK((hi.array() <= lo.array()).all());
  }
}

TEST_CASE("average_advantage: mean of yearly matrices") {
  std::vector<ExportEntry> e;
  for (int y = 2000; y < 2016; ++y) {
    // product 1 is A's specialty in the first 8 years only.
    e.push_back({"A", "1", y, y < 2008 ? 10.0 : 1.0});
    e.push_back({"A", "2", y, y < 2008 ? 1.0 : 10.0});
    e.push_back({"B", "1", y, y < 2008 ? 1.0 : 10.0});
    e.push_back({"B", "2", y, y < 2008 ? 10.0 : 1.0});
  }
  const ExportPanel p(e, 1990, 2020);
  const IndexMap c(p.countries()), pr(p.products());
  const auto avg = average_advantage(p, c, pr, 2000, 2015);
  CHECK(avg.values(0, 0) == 0.5);
  CHECK(avg.values(1, 1) == 0.5);
  CHECK_FALSE(avg.is_binary());
  const auto constant = average_advantage(p, c, pr, 2000, 2002);
  CHECK(constant.values == mat({{1, 0}, {0, 1}}));
  CHECK(constant.is_binary());
  CHECK(average_advantage(p, c, pr, 2000, 2004, 1.0, true).values == mat({{1, 0}, {0, 1}}));
  CHECK_THROWS_AS(average_advantage(p, c, pr, 2005, 2004), ComputationError);
}

TEST_CASE("matrix CSV round trip validates labels") {
  const IndexMap rows({"A", "B"}), cols({"0901", "2605"});
  const auto m = mat({{0.25, 1.0 / 3.0}, {0, 12}});
  std::stringstream s;
  write_matrix_csv(s, m, rows, cols);
  const auto back = read_matrix_csv(s, rows, cols);
  CHECK((back - m).cwiseAbs().maxCoeff() < 1e-12);

  std::stringstream t;
  write_matrix_csv(t, m, rows, cols);
  CHECK_THROWS_AS(read_matrix_csv(t, IndexMap({"A", "C"}), cols), SchemaError);
}
