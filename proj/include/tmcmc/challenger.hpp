#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tmcmc/error.hpp"
#include "tmcmc/target.hpp"

namespace tmcmc {

struct ChallengerRecord {
  int flight_no = 0;
  int failure = 0;
  double temp_f = 0.0;
};

/// O-ring failures against launch temperature, 23 shuttle flights.
inline constexpr std::string_view kChallengerCsv =
    "flight_no,failure,temp_f\n"
    "14,1,53\n"
    "9,1,57\n"
    "23,1,58\n"
    "10,1,63\n"
    "1,0,66\n"
    "5,0,67\n"
    "13,0,67\n"
    "15,0,67\n"
    "4,0,68\n"
    "3,0,69\n"
    "8,0,70\n"
    "17,0,70\n"
    "2,1,70\n"
    "11,1,70\n"
    "6,0,72\n"
    "7,0,73\n"
    "16,0,75\n"
    "21,1,75\n"
    "19,0,76\n"
    "22,0,76\n"
    "12,0,78\n"
    "20,0,79\n"
    "18,0,81\n";

/// Parse records with header `flight_no,failure,temp_f`.
inline std::vector<ChallengerRecord> parse_challenger_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("challenger_csv", "empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "flight_no,failure,temp_f") {
    throw ConfigError("challenger_csv", "expected header flight_no,failure,temp_f");
  }
  std::vector<ChallengerRecord> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    ChallengerRecord r;
    char c1 = 0, c2 = 0;
    if (!(fields >> r.flight_no >> c1 >> r.failure >> c2 >> r.temp_f) || c1 != ',' || c2 != ',' ||
        (r.failure != 0 && r.failure != 1)) {
      throw ConfigError("challenger_csv", "malformed row at line " + std::to_string(line_no));
    }
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<ChallengerRecord> challenger_data() {
  std::istringstream in{std::string(kChallengerCsv)};
  return parse_challenger_csv(in);
}

inline std::vector<ChallengerRecord> load_challenger_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("challenger_csv", "cannot open " + path);
  return parse_challenger_csv(in);
}

/// Logistic regression posterior for failure ~ temperature with independent
/// N(0, prior_sd^2) priors on (intercept, slope). Unnormalized.
///
/// With `center` the covariate is temp - mean(temp); the model is the same up
/// to a reparametrization of the intercept.
inline Target make_challenger_logistic(double prior_sd, bool center = false,
                                       std::vector<ChallengerRecord> data = challenger_data()) {
  if (!(prior_sd > 0.0) || !std::isfinite(prior_sd)) {
    throw ConfigError("prior_sd", "must be finite and > 0");
  }
  if (data.empty()) throw ConfigError("challenger_csv", "no data rows");
  Vector temp, y;
  for (const auto& r : data) {
    temp.push_back(r.temp_f);
    y.push_back(static_cast<double>(r.failure));
  }
  if (center) {
    double mean = 0.0;
    for (double t : temp) mean += t;
    mean /= static_cast<double>(temp.size());
    for (double& t : temp) t -= mean;
  }
  const double prior_prec = 1.0 / (prior_sd * prior_sd);

  auto log_density = [temp, y, prior_prec](std::span<const double> beta) {
    double ll = 0.0;
    for (std::size_t i = 0; i < temp.size(); ++i) {
      const double eta = beta[0] + beta[1] * temp[i];
      // log(1 + e^eta) without overflow
      const double softplus = eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
      ll += y[i] * eta - softplus;
    }
    return ll - 0.5 * prior_prec * (beta[0] * beta[0] + beta[1] * beta[1]);
  };
  auto gradient = [temp, y, prior_prec](std::span<const double> beta, std::span<double> g) {
    g[0] = -prior_prec * beta[0];
    g[1] = -prior_prec * beta[1];
    for (std::size_t i = 0; i < temp.size(); ++i) {
      const double eta = beta[0] + beta[1] * temp[i];
      const double p = 1.0 / (1.0 + std::exp(-eta));
      g[0] += y[i] - p;
      g[1] += (y[i] - p) * temp[i];
    }
  };
  return Target(center ? "challenger-logistic-centered" : "challenger-logistic", 2,
                SupportKind::continuous, log_density, gradient);
}

}  // namespace tmcmc
