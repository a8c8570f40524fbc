// Independent reference implementations used only by the tests.
#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/data.hpp"
#include "fairaudit/rng.hpp"
#include "fairaudit/similarity.hpp"
#include "fairaudit/stats.hpp"

namespace oracle {

// Exact mid-p from integer binomial coefficients.
inline double midp(long k, long n) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  if (n == 0) return 1.0;
  const long ks = std::min(k, n - k);
  cpp_int c = 1, tail = 0, at_k = 0;
  for (long i = 0; i <= ks; ++i) {
    if (i > 0) c = c * (n - i + 1) / i;
    tail += c;
    if (i == ks) at_k = c;
  }
  cpp_rational p(2 * tail - at_k, cpp_int(1) << static_cast<unsigned>(n));
  const double v = static_cast<double>(p);
  return std::min(1.0, v);
}

struct Welch {
  double t, df, p;
};

inline Welch welch(std::span<const double> a, std::span<const double> b, fairaudit::Tail tail) {
  auto moments = [](std::span<const double> x) {
    long double m = 0;
    for (double v : x) m += v;
    m /= x.size();
    long double s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return std::pair{m, s / (x.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const long double qa = va / a.size(), qb = vb / b.size();
  const long double t = (ma - mb) / std::sqrt(qa + qb);
  const long double df = (qa + qb) * (qa + qb) /
                         (qa * qa / (a.size() - 1) + qb * qb / (b.size() - 1));
  boost::math::students_t dist(static_cast<double>(df));
  const double td = static_cast<double>(t);
  double p = 0;
  switch (tail) {
    case fairaudit::Tail::right: p = boost::math::cdf(boost::math::complement(dist, td)); break;
    case fairaudit::Tail::left: p = boost::math::cdf(dist, td); break;
    case fairaudit::Tail::two_sided:
      p = 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(td)));
      break;
  }
  return {td, static_cast<double>(df), p};
}

inline double t_sf(double t, double df) {
  return boost::math::cdf(boost::math::complement(boost::math::students_t(df), t));
}

inline double chi2_sf(double x, double df) {
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

// Exhaustive nearest neighbor: every source against every target, quadratic
// form expanded by hand, ties to the smaller row id.
inline std::vector<fairaudit::MatchPair> brute_force_match(const fairaudit::Dataset& d,
                                                           const Eigen::MatrixXd& inv,
                                                           fairaudit::Group source_group) {
  std::vector<fairaudit::MatchPair> out;
  const auto& x = d.features();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.groups()[i] != source_group) continue;
    double best = std::numeric_limits<double>::infinity();
    fairaudit::RowId best_id = std::numeric_limits<fairaudit::RowId>::max();
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (d.groups()[j] == source_group) continue;
      double q = 0;
      for (Eigen::Index r = 0; r < x.cols(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
          q += (x(i, r) - x(j, r)) * inv(r, c) * (x(i, c) - x(j, c));
        }
      }
      const double dist = std::sqrt(std::max(q, 0.0));
      const double tol = std::isfinite(best) ? 1e-12 * std::max(1.0, best) : 0.0;
      if (dist < best - tol || (dist <= best + tol && d.row_ids()[j] < best_id)) {
        best = dist;
        best_id = d.row_ids()[j];
      }
    }
    out.push_back({d.row_ids()[i], best_id, best});
  }
  return out;
}

}  // namespace oracle

namespace testutil {

// Small dataset from explicit rows; ids 0..n-1 unless given.
inline fairaudit::Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                                       const std::vector<int>& outcomes,
                                       const std::vector<fairaudit::Group>& groups,
                                       std::vector<fairaudit::RowId> ids = {}) {
  const auto n = rows.size();
  const auto d = rows.empty() ? 0 : rows.front().size();
  fairaudit::FeatureMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  if (ids.empty()) {
    for (std::size_t i = 0; i < n; ++i) ids.push_back(static_cast<fairaudit::RowId>(i));
  }
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
  return fairaudit::Dataset(ids, x, names, outcomes, groups);
}

inline std::vector<double> random_sample(fairaudit::Rng& rng, std::size_t n, double mean,
                                         double sd) {
  std::vector<double> v(n);
  for (auto& x : v) x = mean + sd * rng.normal();
  return v;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fairaudit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace testutil
