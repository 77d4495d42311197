#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "datagen.hpp"
#include "dataset.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "estimators.hpp"
#include "linalg.hpp"
#include "rng.hpp"

using rsc::DataSet;
using rsc::Matrix;
using rsc::Scenario;
using rsc::SpdMatrix;
using rsc::Vector;

namespace {

std::string temp_path(const char* name) {
  return std::string("/tmp/rsc_datagen_") + name;
}

// Standard normal CDF, for the Kolmogorov distance check.
double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_distance_to_normal(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double f = phi(v[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
  }
  return d;
}

}  // namespace

TEST_CASE("scenario defaults and derived counts") {
  Scenario scn;
  CHECK(scn.trace_value() == doctest::Approx(5.0));
  CHECK(scn.c1_value() == doctest::Approx(0.2));
  CHECK(scn.c2_value() == doctest::Approx(1.0));
  CHECK(scn.outlier_count() == 0);  // outlier_mode == none
  scn.validate();

  scn.N = 100;
  scn.xi = 0.03;
  scn.outlier_mode = rsc::OutlierMode::unclustered;
  CHECK(scn.outlier_count() == 3);
  CHECK(scn.body_count() == 97);
}

TEST_CASE("scenario parsing round-trips and rejects unknown keys") {
  const std::string text =
      "# comment line\n"
      "p = 7\n"
      "trace = 7\n"
      "c1 = 0.3\n"
      "c2 = 50      # trailing comment\n"
      "N = 120\n"
      "xi = 0.05\n"
      "k = 10\n"
      "outlier_mode = clustered\n"
      "body = t:5\n"
      "trials = 17\n"
      "seed = 42\n";
  Scenario scn = rsc::parse_scenario(text);
  CHECK(scn.p == 7);
  CHECK(scn.trace == doctest::Approx(7.0));
  CHECK(scn.c1 == doctest::Approx(0.3));
  CHECK(scn.c2 == doctest::Approx(50.0));
  CHECK(scn.N == 120);
  CHECK(scn.xi == doctest::Approx(0.05));
  CHECK(scn.outlier_mode == rsc::OutlierMode::clustered);
  CHECK(scn.body == rsc::BodyFamily::t_dist);
  CHECK(scn.t_df == 5);
  CHECK(scn.trials == 17);
  CHECK(scn.seed == 42);

  Scenario back = rsc::parse_scenario(rsc::serialize_scenario(scn));
  CHECK(back.p == scn.p);
  CHECK(back.c1 == scn.c1);
  CHECK(back.c2 == scn.c2);
  CHECK(back.xi == scn.xi);
  CHECK(back.body == scn.body);
  CHECK(back.seed == scn.seed);

  CHECK_THROWS_AS(rsc::parse_scenario("p = 5\nrho = 2\n"), rsc::Error);
  CHECK_THROWS_AS(rsc::parse_scenario("p = -1\n"), rsc::Error);
  CHECK_THROWS_AS(rsc::parse_scenario("xi = 1.0\n"), rsc::Error);
  CHECK_THROWS_AS(rsc::parse_scenario("c1 = 1.5\n"), rsc::Error);
  CHECK_THROWS_AS(rsc::parse_scenario("c2 = 0.5\n"), rsc::Error);
  CHECK_THROWS_AS(rsc::parse_scenario("body = t:0\n"), rsc::Error);
  CHECK_THROWS_AS(rsc::parse_scenario("body = cauchy\n"), rsc::Error);
  CHECK_THROWS_AS(rsc::parse_scenario("p\n"), rsc::Error);
}

TEST_CASE("contribution_ratios branch selection") {
  // (p-1)c1 + c1/c2 = 0.9 < 1: infeasible, uniform output.
  auto uni = rsc::contribution_ratios(5, 0.2, 2.0, 1);
  REQUIRE(uni.size() == 5);
  for (double r : uni) CHECK(r == doctest::Approx(0.2).epsilon(1e-15));

  // Feasible: both predicates hold (2.4006 >= 1, 0.6024 <= 1).
  auto feas = rsc::contribution_ratios(5, 0.6, 1000.0, 2);
  REQUIRE(feas.size() == 5);
  CHECK(feas.front() == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(feas.back() == doctest::Approx(0.0006).epsilon(1e-12));
  CHECK(std::accumulate(feas.begin(), feas.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::is_sorted(feas.rbegin(), feas.rend()));
}

TEST_CASE("contribution_ratios middle bounds on accepted draws") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto r = rsc::contribution_ratios(8, 0.3, 50.0, seed);
    REQUIRE(r.size() == 8);
    CHECK(std::accumulate(r.begin(), r.end(), 0.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.front() == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(r.back() == doctest::Approx(0.006).epsilon(1e-12));
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
      CHECK(r[i] >= 0.006 - 1e-12);
      CHECK(r[i] <= 0.3 + 1e-12);
    }
    CHECK(std::is_sorted(r.rbegin(), r.rend()));
  }
}

TEST_CASE("contribution_ratios small-p rule and p=1") {
  auto one = rsc::contribution_ratios(1, 1.0, 1.0, 3);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == doctest::Approx(1.0));

  // p=2: (c1, c1/c2) rescaled onto the simplex.
  auto two = rsc::contribution_ratios(2, 0.5, 4.0, 4);
  REQUIRE(two.size() == 2);
  CHECK(two[0] == doctest::Approx(0.5 / 0.625));
  CHECK(two[1] == doctest::Approx(0.125 / 0.625));

  // p=3: middle pinned halfway between the extremes before rescaling.
  auto three = rsc::contribution_ratios(3, 0.5, 4.0, 5);
  REQUIRE(three.size() == 3);
  const double sum = 0.5 + 0.3125 + 0.125;
  CHECK(three[0] == doctest::Approx(0.5 / sum));
  CHECK(three[1] == doctest::Approx(0.3125 / sum));
  CHECK(three[2] == doctest::Approx(0.125 / sum));
}

TEST_CASE("random_orthonormal is orthonormal and seed-sensitive") {
  auto q1 = rsc::random_orthonormal(1, 10);
  CHECK(std::abs(std::abs(q1(0, 0)) - 1.0) < 1e-15);

  Matrix q = rsc::random_orthonormal(10, 11);
  CHECK((q.transpose() * q - Matrix::Identity(10, 10)).norm() < 1e-10);

  Matrix q2 = rsc::random_orthonormal(10, 12);
  CHECK((q - q2).norm() > 0.1);
}

TEST_CASE("make_sigma honors trace, c1 and c2") {
  Scenario scn;
  scn.p = 25;
  scn.trace = 25.0;
  scn.c1 = 0.3;
  scn.c2 = 50.0;
  SpdMatrix sigma = rsc::make_sigma(scn, 0);
  CHECK(sigma.mat().trace() == doctest::Approx(25.0).epsilon(1e-10));
  auto ed = rsc::sym_eigen(sigma);
  CHECK(ed.values(0) == doctest::Approx(7.5).epsilon(1e-8));
  CHECK(ed.values(24) == doctest::Approx(0.15).epsilon(1e-8));
  CHECK(sigma.strictly_pd());
}

TEST_CASE("make_sigma identity case") {
  Scenario scn;
  scn.p = 10;
  scn.trace = 10.0;
  scn.c1 = 0.1;
  scn.c2 = 1.0;
  SpdMatrix sigma = rsc::make_sigma(scn, 0);
  CHECK((sigma.mat() - Matrix::Identity(10, 10)).norm() < 1e-12);
}

TEST_CASE("make_sigma spectrum matches the ratio vector") {
  Scenario scn;
  scn.p = 8;
  scn.trace = 16.0;
  scn.c1 = 0.3;
  scn.c2 = 50.0;
  scn.seed = 9;
  SpdMatrix sigma = rsc::make_sigma(scn, 3);
  auto ed = rsc::sym_eigen(sigma);
  // Same substream keying as make_sigma: (seed, ratios stage, trial).
  auto ratios = rsc::contribution_ratios(
      8, 0.3, 50.0, rsc::child_seed(9, rsc::kStageRatios, 3));
  for (int j = 0; j < 8; ++j)
    CHECK(ed.values(j) == doctest::Approx(16.0 * ratios[j]).epsilon(1e-9));
}

TEST_CASE("sample_gaussian matches its covariance at scale") {
  SpdMatrix i2 = SpdMatrix::identity(2);
  DataSet big = rsc::sample_gaussian(100000, i2, 21);
  Matrix cov = big.rows().transpose() * big.rows() / 100000.0;
  CHECK((cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.02);

  Matrix d(2, 2);
  d << 4, 0, 0, 1;
  DataSet anis = rsc::sample_gaussian(100000, SpdMatrix(d), 22);
  double v0 = anis.rows().col(0).squaredNorm() / 100000.0;
  double v1 = anis.rows().col(1).squaredNorm() / 100000.0;
  CHECK(v0 == doctest::Approx(4.0).epsilon(0.03));
  CHECK(v1 == doctest::Approx(1.0).epsilon(0.03));

  DataSet empty = rsc::sample_gaussian(0, i2, 23);
  CHECK(empty.n() == 0);
  CHECK(empty.p() == 2);
}

TEST_CASE("sample_t approaches the Gaussian at large df") {
  SpdMatrix i2 = SpdMatrix::identity(2);
  DataSet t = rsc::sample_t(100000, i2, 1000000, 31);
  std::vector<double> first(100000);
  for (int i = 0; i < 100000; ++i) first[i] = t.rows()(i, 0);
  CHECK(ks_distance_to_normal(std::move(first)) < 0.01);
}

TEST_CASE("sample_t heavy tail at df=1 inflates the scm but not the sscm") {
  SpdMatrix i2 = SpdMatrix::identity(2);
  DataSet small = rsc::sample_t(1000, i2, 1, 32);
  DataSet large = rsc::sample_t(100000, i2, 1, 32);
  double e_small = rsc::scm(small).mat().cwiseAbs().maxCoeff();
  double e_large = rsc::scm(large).mat().cwiseAbs().maxCoeff();
  CHECK(e_large > e_small);
  CHECK(e_large > 10.0);  // Cauchy-type second moments blow up
  CHECK(rsc::sscm(small).mat().cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  CHECK(rsc::sscm(large).mat().cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  CHECK(rsc::sscm(large).mat().trace() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sample_t with forced u = df is the Gaussian draw") {
  SpdMatrix i3 = SpdMatrix::identity(3);
  std::vector<double> u(50, 7.0);
  DataSet t = rsc::sample_t(50, i3, 7, 33, &u);
  DataSet g = rsc::sample_gaussian(50, i3, 33);
  CHECK((t.rows() - g.rows()).norm() == 0.0);

  std::vector<double> wrong(49, 7.0);
  CHECK_THROWS_AS(rsc::sample_t(50, i3, 7, 33, &wrong), rsc::Error);
}

TEST_CASE("mean_sq_mahalanobis formula") {
  Matrix rows(1, 2);
  rows << 1, 0;
  CHECK(rsc::mean_sq_mahalanobis(DataSet(rows), SpdMatrix::identity(2)) ==
        doctest::Approx(1.0));

  SpdMatrix i3 = SpdMatrix::identity(3);
  DataSet g = rsc::sample_gaussian(100000, i3, 41);
  CHECK(rsc::mean_sq_mahalanobis(g, i3) == doctest::Approx(3.0).epsilon(0.02));

  SpdMatrix scaled(Matrix(4.0 * Matrix::Identity(3, 3)));
  CHECK(rsc::mean_sq_mahalanobis(g, scaled) ==
        doctest::Approx(rsc::mean_sq_mahalanobis(g, i3) / 4.0).epsilon(1e-12));

  CHECK_THROWS_AS(rsc::mean_sq_mahalanobis(DataSet(Matrix(0, 2)), i3), rsc::Error);
}

TEST_CASE("outliers_unclustered satisfies the Mahalanobis constraint") {
  SpdMatrix i2 = SpdMatrix::identity(2);
  Matrix z = rsc::outliers_unclustered(5, i2, 4.0, 51);
  REQUIRE(z.rows() == 5);
  for (int i = 0; i < 5; ++i)
    CHECK(z.row(i).norm() == doctest::Approx(2.0).epsilon(1e-12));

  Matrix d(2, 2);
  d << 3, 0.4, 0.4, 1;
  SpdMatrix sigma{d};
  Matrix sinv = rsc::spd_inverse(sigma).mat();
  Matrix za = rsc::outliers_unclustered(7, sigma, 9.0, 52);
  for (int i = 0; i < 7; ++i) {
    Vector zi = za.row(i).transpose();
    CHECK(std::abs(zi.dot(sinv * zi) - 9.0) < 1e-10);
  }
}

TEST_CASE("outliers_unclustered directions are unbiased") {
  SpdMatrix i3 = SpdMatrix::identity(3);
  Matrix z = rsc::outliers_unclustered(1000, i3, 4.0, 53);
  Vector mean = z.colwise().mean().transpose() / 2.0;  // unit directions
  const double sd = 3.0 / std::sqrt(1000.0 * 3.0);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(mean(j)) < sd);
}

TEST_CASE("outliers_clustered center and spread") {
  Matrix d(2, 2);
  d << 3, 0.4, 0.4, 1;
  SpdMatrix sigma{d};
  Matrix sinv = rsc::spd_inverse(sigma).mat();
  auto cl = rsc::outliers_clustered(10000, sigma, 25.0, 54);
  CHECK(std::abs(cl.center.dot(sinv * cl.center) - 25.0) < 1e-10);
  REQUIRE(cl.members.rows() == 10000);

  Vector mean = cl.members.colwise().mean().transpose();
  for (int j = 0; j < 2; ++j)
    CHECK(std::abs(mean(j) - cl.center(j)) < 3.0 * 0.1 / std::sqrt(10000.0));
  for (int j = 0; j < 2; ++j) {
    double var =
        (cl.members.col(j).array() - mean(j)).square().sum() / (10000.0 - 1.0);
    CHECK(var == doctest::Approx(0.01).epsilon(0.10));
  }
}

TEST_CASE("scenario_dataset composition") {
  Scenario scn;
  scn.p = 4;
  scn.N = 100;
  scn.xi = 0.03;
  scn.k = 10.0;
  scn.outlier_mode = rsc::OutlierMode::unclustered;
  scn.seed = 77;
  auto draw = rsc::scenario_dataset(scn, 0);
  CHECK(draw.data.n() == 100);
  CHECK(draw.data.p() == 4);
  REQUIRE(draw.data.outlier_indices().has_value());
  CHECK(*draw.data.outlier_indices() == std::vector<int>{97, 98, 99});

  // Outliers sit at k * r times the body's mean squared Mahalanobis scale.
  Matrix sinv = rsc::spd_inverse(draw.sigma).mat();
  DataSet body{Matrix(draw.data.rows().topRows(97))};
  const double target = 10.0 * rsc::mean_sq_mahalanobis(body, draw.sigma);
  for (int i = 97; i < 100; ++i) {
    Vector zi = draw.data.rows().row(i).transpose();
    CHECK(std::abs(zi.dot(sinv * zi) - target) < 1e-8 * target);
  }

  auto again = rsc::scenario_dataset(scn, 0);
  CHECK((draw.data.rows() - again.data.rows()).norm() == 0.0);
  CHECK((draw.sigma.mat() - again.sigma.mat()).norm() == 0.0);

  auto other = rsc::scenario_dataset(scn, 1);
  CHECK((draw.data.rows() - other.data.rows()).norm() > 1e-6);
}

TEST_CASE("scenario_dataset with no outliers") {
  Scenario scn;
  scn.p = 3;
  scn.N = 50;
  scn.seed = 78;
  auto draw = rsc::scenario_dataset(scn, 2);
  CHECK(draw.data.n() == 50);
  REQUIRE(draw.data.outlier_indices().has_value());
  CHECK(draw.data.outlier_indices()->empty());
}

TEST_CASE("scenario_dataset honors a sigma override") {
  Scenario scn;
  scn.p = 3;
  scn.N = 40;
  scn.seed = 79;
  SpdMatrix pinned(Matrix(2.0 * Matrix::Identity(3, 3)));
  auto draw = rsc::scenario_dataset(scn, 0, &pinned);
  CHECK((draw.sigma.mat() - pinned.mat()).norm() == 0.0);

  SpdMatrix wrong = SpdMatrix::identity(4);
  CHECK_THROWS_AS(rsc::scenario_dataset(scn, 0, &wrong), rsc::Error);
}

TEST_CASE("clustered scenario keeps members adjacent to the planted center") {
  Scenario scn;
  scn.p = 5;
  scn.N = 100;
  scn.xi = 0.1;
  scn.k = 10.0;
  scn.outlier_mode = rsc::OutlierMode::clustered;
  scn.seed = 80;
  auto draw = rsc::scenario_dataset(scn, 0);
  REQUIRE(draw.data.outlier_indices()->size() == 10);
  Matrix out = draw.data.rows().bottomRows(10);
  Vector centroid = out.colwise().mean().transpose();
  for (int i = 0; i < 10; ++i)
    CHECK((out.row(i).transpose() - centroid).norm() < 1.0);
}

TEST_CASE("dataset zero-row accounting and csv round-trip") {
  Matrix rows(3, 2);
  rows << 1, 2, 0, 0, -0.5, 3;
  DataSet d{rows};
  CHECK(d.zero_row_count() == 1);

  const std::string path = temp_path("roundtrip.csv");
  rsc::write_matrix_csv(path, rows);
  DataSet back = rsc::read_csv(path, false);
  CHECK((back.rows() - rows).norm() == 0.0);

  // Header skip drops the first line unconditionally.
  DataSet skipped = rsc::read_csv(path, true);
  CHECK(skipped.n() == 2);
  CHECK((skipped.rows() - rows.bottomRows(2)).norm() == 0.0);
  std::remove(path.c_str());

  CHECK_THROWS_AS(rsc::read_csv("/nonexistent/rsc.csv", false), rsc::Error);
}

TEST_CASE("read_csv validates shape and numbers") {
  const std::string path = temp_path("bad.csv");
  {
    FILE* f = std::fopen(path.c_str(), "w");
    REQUIRE(f);
    std::fputs("1,2\n3\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(rsc::read_csv(path, false), rsc::Error);
  {
    FILE* f = std::fopen(path.c_str(), "w");
    REQUIRE(f);
    std::fputs("1,x\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(rsc::read_csv(path, false), rsc::Error);
  std::remove(path.c_str());
}
