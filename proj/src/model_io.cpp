#include <cstdio>
#include <json.hpp>

#include "clustab/error.hpp"
#include "clustab/gmm.hpp"

namespace clustab::gmm {
namespace {

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void append_array(std::string& out, std::span<const double> values) {
  out.push_back('[');
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += number(values[i]);
  }
  out.push_back(']');
}

void append_matrix(std::string& out, const RowMatrix& m) {
  out += "[\n";
  for (std::size_t i = 0; i < m.rows; ++i) {
    out += "    ";
    append_array(out, m.row(i));
    out += i + 1 < m.rows ? ",\n" : "\n";
  }
  out += "  ]";
}

RowMatrix read_matrix(const nlohmann::json& j, std::size_t rows, std::size_t cols, const char* name) {
  if (!j.is_array() || j.size() != rows) {
    throw Error(ErrorCode::ParseError, std::string("model field '") + name + "' has wrong shape");
  }
  RowMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw Error(ErrorCode::ParseError, std::string("model field '") + name + "' has wrong shape");
    }
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

}  // namespace

// Written by hand so floats carry 17 significant digits.
std::string model_to_json(const MixtureModel& model) {
  const auto& c = model.config;
  std::string out = "{\n";
  out += "  \"k\": " + std::to_string(model.k) + ",\n";
  out += "  \"d\": " + std::to_string(model.d) + ",\n";
  out += "  \"weights\": ";
  append_array(out, model.weights);
  out += ",\n  \"means\": ";
  append_matrix(out, model.means);
  out += ",\n  \"variances\": ";
  append_matrix(out, model.variances);
  out += ",\n  \"config\": {\"k\": " + std::to_string(c.k) + ", \"covariance\": \"diag\"" +
         ", \"max_iter\": " + std::to_string(c.max_iter) + ", \"tol\": " + number(c.tol) +
         ", \"reg_covar\": " + number(c.reg_covar) + ", \"seed\": " + std::to_string(c.seed) +
         ", \"n_init\": " + std::to_string(c.n_init) + ", \"init\": \"" + to_string(c.init) + "\"}";
  out += ",\n  \"final_log_likelihood\": " + number(model.final_log_likelihood);
  out += ",\n  \"n_iter\": " + std::to_string(model.n_iter);
  out += ",\n  \"converged\": " + std::string(model.converged ? "true" : "false");
  out += "\n}\n";
  return out;
}

MixtureModel model_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MixtureModel m;
    m.k = j.at("k").get<std::size_t>();
    m.weights = j.at("weights").get<std::vector<double>>();
    if (m.weights.size() != m.k) throw Error(ErrorCode::ParseError, "model weights length differs from k");
    const auto& means = j.at("means");
    m.d = j.contains("d") ? j.at("d").get<std::size_t>()
                          : (means.empty() ? 0 : means.at(0).size());
    m.means = read_matrix(means, m.k, m.d, "means");
    m.variances = read_matrix(j.at("variances"), m.k, m.d, "variances");
    m.final_log_likelihood = j.at("final_log_likelihood").get<double>();
    m.n_iter = j.at("n_iter").get<std::size_t>();
    m.converged = j.at("converged").get<bool>();
    if (j.contains("config")) {
      const auto& c = j.at("config");
      m.config.k = c.value("k", m.k);
      m.config.max_iter = c.value("max_iter", m.config.max_iter);
      m.config.tol = c.value("tol", m.config.tol);
      m.config.reg_covar = c.value("reg_covar", m.config.reg_covar);
      m.config.seed = c.value("seed", m.config.seed);
      m.config.n_init = c.value("n_init", m.config.n_init);
      m.config.init = parse_init_method(c.value("init", std::string("kmeans")));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed model JSON: ") + e.what());
  }
}

}  // namespace clustab::gmm
