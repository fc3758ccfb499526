#include "factorreg/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace factorreg::io {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

nlohmann::json quartiles_json(const simulate::Quartiles& q) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"q1", num(q.q1)}, {"median", num(q.median)}, {"q3", num(q.q3)}, {"n", q.n}};
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Matrix parse_csv(const std::string& text, bool header) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  long line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (header && line_no == 1) continue;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      const std::string field = trim(rest.substr(0, comma));
      double value = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
      if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ParseError("row " + std::to_string(line_no) + ": cannot parse '" + field + "'",
                         line_no);
      }
      row.push_back(value);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows.empty()) {
      width = row.size();
    } else if (row.size() != width) {
      throw ParseError("row " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                           " fields, found " + std::to_string(row.size()),
                       line_no);
    }
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Matrix read_csv(const std::filesystem::path& path, bool header) {
  return parse_csv(read_text(path), header);
}

std::string format_csv(const Matrix& m, bool header, const std::string& prefix) {
  std::string out;
  if (header) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += prefix + std::to_string(j + 1);
    }
    out += '\n';
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const Matrix& m, bool header,
               const std::string& prefix) {
  write_text(path, format_csv(m, header, prefix));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IOError("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string report_to_json(const simulate::ReplicationReport& rep, bool with_records) {
  const auto& sc = rep.scenario;
  nlohmann::json j;
  j["scenario"] = {{"design", simulate::to_string(sc.design)},
                   {"p", sc.p},
                   {"T", sc.T},
                   {"m", sc.m},
                   {"r", sc.r},
                   {"s", sc.s},
                   {"delta1", sc.delta1},
                   {"delta2", sc.delta2},
                   {"seed", sc.seed},
                   {"design_seed", sc.design_seed},
                   {"sparsity", sc.sparsity},
                   {"tail_scale", sc.tail_scale}};
  j["n_reps"] = rep.n_reps;
  j["failures"] = rep.failures;
  j["p_rhat_eq_r"] = std::isfinite(rep.prob_rhat_correct) ? nlohmann::json(rep.prob_rhat_correct)
                                                         : nlohmann::json(nullptr);
  j["b_error"] = quartiles_json(rep.b_error);
  j["dbar"] = quartiles_json(rep.dbar);
  j["rmse"] = quartiles_json(rep.rmse);
  if (with_records) {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : rep.records) {
      auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
      recs.push_back({{"index", r.index},
                      {"seed", r.seed},
                      {"ok", r.ok},
                      {"error", r.error},
                      {"rhat", r.rhat},
                      {"shat", r.shat},
                      {"b_error", num(r.b_error)},
                      {"dbar", num(r.dbar)},
                      {"rmse", num(r.rmse)}});
    }
    j["records"] = std::move(recs);
  }
  return j.dump(2);
}

}  // namespace factorreg::io
