#ifndef MRID_IO_HPP
#define MRID_IO_HPP

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "mrid/transform.hpp"

namespace mrid {

using Json = nlohmann::ordered_json;

namespace io {

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::InvalidArgument, "write to '" + path + "' failed");
}

/// 17 significant digits; parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::ParseError,
                origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

inline const Json& require(const Json& j, const std::string& key, const std::string& context) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::SchemaError, context + ": missing field '" + key + "'");
  }
  return j.at(key);
}

template <typename T>
T get_as(const Json& j, const std::string& what) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, what + ": " + e.what());
  }
}

template <typename T>
T field(const Json& j, const std::string& key, const std::string& context) {
  return get_as<T>(require(j, key, context), context + "." + key);
}

template <typename T>
T field_or(const Json& j, const std::string& key, T fallback, const std::string& context) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get_as<T>(j.at(key), context + "." + key);
}

}  // namespace io

/// Row-major nested arrays.
inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::SchemaError, what + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw Error(ErrorKind::SchemaError, what + ": rows must be non-empty arrays");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const Json& row = j[r];
    if (!row.is_array() || row.size() != cols) {
      throw Error(ErrorKind::SchemaError, what + ": row " + std::to_string(r) + " has the wrong length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) {
        throw Error(ErrorKind::SchemaError, what + ": entry (" + std::to_string(r) + "," + std::to_string(c) +
                                                ") is not a number");
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  require_finite(m, what);
  return m;
}

inline Json matrices_to_json(const std::vector<Matrix>& ms) {
  Json out = Json::array();
  for (const auto& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

inline std::vector<Matrix> matrices_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorKind::SchemaError, what + ": expected an array of matrices");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(matrix_from_json(j[i], what + "[" + std::to_string(i) + "]"));
  return out;
}

// ---------------------------------------------------------------------------
// Signals: CSV with header k,u_1..u_m,y_1..y_l,obs_1..obs_l

inline std::string signals_to_csv(const SignalLog& log) {
  const Eigen::Index m = log.u.rows();
  const Eigen::Index l = log.y.rows();
  std::string out = "k";
  for (Eigen::Index i = 1; i <= m; ++i) out += ",u_" + std::to_string(i);
  for (Eigen::Index i = 1; i <= l; ++i) out += ",y_" + std::to_string(i);
  for (Eigen::Index i = 1; i <= l; ++i) out += ",obs_" + std::to_string(i);
  out += '\n';
  const bool has_mask = log.observed.rows() == l && log.observed.cols() == log.y.cols();
  for (Eigen::Index k = 0; k < log.u.cols(); ++k) {
    out += std::to_string(k);
    for (Eigen::Index i = 0; i < m; ++i) out += "," + io::format_double(log.u(i, k));
    for (Eigen::Index i = 0; i < l; ++i) out += "," + io::format_double(log.y(i, k));
    for (Eigen::Index i = 0; i < l; ++i) out += (!has_mask || log.observed(i, k)) ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

inline SignalLog signals_from_csv(const std::string& text, const std::string& origin = "<csv>") {
  std::vector<std::string> lines;
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorKind::SchemaError, origin + ": empty file, expected a header row");

  const auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = s.find(',', start);
      cells.push_back(s.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return cells;
  };

  const auto header = split(lines.front());
  if (header.empty() || header[0] != "k") throw Error(ErrorKind::SchemaError, origin + ": first column must be 'k'");
  std::size_t m = 0;
  std::size_t l = 0;
  std::size_t obs = 0;
  std::size_t col = 1;
  const auto expect_group = [&](const std::string& prefix, std::size_t& count) {
    while (col < header.size() && header[col] == prefix + std::to_string(count + 1)) {
      ++count;
      ++col;
    }
  };
  expect_group("u_", m);
  expect_group("y_", l);
  expect_group("obs_", obs);
  if (col != header.size()) {
    throw Error(ErrorKind::SchemaError, origin + ": unexpected column '" + header[col] + "'");
  }
  if (m == 0) throw Error(ErrorKind::SchemaError, origin + ": missing input columns u_1..u_m");
  if (l == 0) throw Error(ErrorKind::SchemaError, origin + ": missing output columns y_1..y_l");
  if (obs != l) {
    throw Error(ErrorKind::SchemaError, origin + ": missing observation mask columns obs_1..obs_" + std::to_string(l));
  }

  const std::size_t N = lines.size() - 1;
  if (N == 0) throw Error(ErrorKind::SchemaError, origin + ": no samples");
  SignalLog log;
  log.u.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(N));
  log.y.resize(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(N));
  log.observed.resize(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(N));
  for (std::size_t r = 0; r < N; ++r) {
    const std::size_t line_no = r + 2;
    const auto cells = split(lines[r + 1]);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::ParseError, origin + ":" + std::to_string(line_no) + ":1: expected " +
                                             std::to_string(header.size()) + " fields, got " +
                                             std::to_string(cells.size()));
    }
    const auto where = [&](std::size_t c) {
      return origin + ":" + std::to_string(line_no) + ":" + std::to_string(c + 1);
    };
    long long k = -1;
    {
      const auto& s = cells[0];
      const auto res = std::from_chars(s.data(), s.data() + s.size(), k);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size() || k != static_cast<long long>(r)) {
        throw Error(ErrorKind::ParseError, where(0) + ": expected sample index " + std::to_string(r));
      }
    }
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto& s = cells[c];
      if (c > m + l) {
        if (s != "0" && s != "1") throw Error(ErrorKind::ParseError, where(c) + ": mask value must be 0 or 1");
        log.observed(static_cast<Eigen::Index>(c - 1 - m - l), static_cast<Eigen::Index>(r)) = s == "1";
        continue;
      }
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw Error(ErrorKind::ParseError, where(c) + ": '" + s + "' is not a finite number");
      }
      if (c <= m) {
        log.u(static_cast<Eigen::Index>(c - 1), static_cast<Eigen::Index>(r)) = v;
      } else {
        log.y(static_cast<Eigen::Index>(c - 1 - m), static_cast<Eigen::Index>(r)) = v;
      }
    }
  }
  return log;
}

inline void save_signals(const std::string& path, const SignalLog& log) { io::write_text(path, signals_to_csv(log)); }

inline SignalLog load_signals(const std::string& path) { return signals_from_csv(io::read_text(path), path); }

// ---------------------------------------------------------------------------
// Models

/// Identified model as stored on disk, with the sampling pattern it was identified under.
struct ModelFile {
  IdentifiedModel model;
  std::vector<int> rates;
  std::vector<int> offsets;
  std::optional<Matrix> T;
  SelectorConvention convention = SelectorConvention::Example;
  std::uint64_t seed = 0;
  int N = 0;
};

inline SelectorConvention convention_from_string(const std::string& s, const std::string& what) {
  if (s == "general") return SelectorConvention::General;
  if (s == "example") return SelectorConvention::Example;
  throw Error(ErrorKind::SchemaError, what + ": unknown convention '" + s + "' (general|example)");
}

inline Json model_to_json(const ModelFile& f) {
  Json j;
  j["format"] = "mrid-model";
  j["version"] = 1;
  j["n"] = f.model.n;
  j["m"] = f.model.m;
  j["l"] = f.model.l;
  j["M"] = f.model.M;
  j["rates"] = f.rates;
  j["offsets"] = f.offsets;
  j["A"] = matrix_to_json(f.model.A);
  j["B"] = matrix_to_json(f.model.B);
  j["C"] = matrix_to_json(f.model.C);
  j["D"] = matrix_to_json(f.model.D);
  if (f.T) j["T"] = matrix_to_json(*f.T);
  j["convention"] = std::string(to_string(f.convention));
  j["provenance"] = Json{{"seed", f.seed}, {"N", f.N}, {"convention", std::string(to_string(f.convention))}};
  j["identification"] = Json{{"block_rows", f.model.block_rows},
                             {"order_gap", f.model.order_gap},
                             {"order_exposed", f.model.order_exposed},
                             {"input_hankel_rank", f.model.input_hankel_rank},
                             {"singular_values", std::vector<double>(f.model.singular_values.data(),
                                                                     f.model.singular_values.data() +
                                                                         f.model.singular_values.size())}};
  return j;
}

inline ModelFile model_from_json(const Json& j) {
  const std::string ctx = "model";
  ModelFile f;
  if (io::field<std::string>(j, "format", ctx) != "mrid-model") {
    throw Error(ErrorKind::SchemaError, "model: format must be 'mrid-model'");
  }
  f.model.n = io::field<int>(j, "n", ctx);
  f.model.m = io::field<int>(j, "m", ctx);
  f.model.l = io::field<int>(j, "l", ctx);
  f.rates = io::field<std::vector<int>>(j, "rates", ctx);
  f.offsets = io::field_or<std::vector<int>>(j, "offsets", {}, ctx);
  const MultirateSpec spec = build_masks(f.rates, f.offsets);
  f.offsets = spec.offsets;
  f.model.M = spec.M;
  if (j.contains("M") && io::field<int>(j, "M", ctx) != spec.M) {
    throw Error(ErrorKind::SchemaError, "model: M does not equal lcm(rates) = " + std::to_string(spec.M));
  }
  if (static_cast<int>(f.rates.size()) != f.model.l) {
    throw Error(ErrorKind::SchemaError, "model: " + std::to_string(f.rates.size()) + " rates for l = " +
                                            std::to_string(f.model.l) + " outputs");
  }
  f.model.A = matrix_from_json(io::require(j, "A", ctx), "model.A");
  f.model.B = matrix_from_json(io::require(j, "B", ctx), "model.B");
  f.model.C = matrix_from_json(io::require(j, "C", ctx), "model.C");
  f.model.D = matrix_from_json(io::require(j, "D", ctx), "model.D");
  const int Mn = spec.M * f.model.n;
  const int Mm = spec.M * f.model.m;
  const int Ml = spec.M * f.model.l;
  const auto shape_ok = [](const Matrix& x, int r, int c) { return x.rows() == r && x.cols() == c; };
  if (!shape_ok(f.model.A, Mn, Mn) || !shape_ok(f.model.B, Mn, Mm) || !shape_ok(f.model.C, Ml, Mn) ||
      !shape_ok(f.model.D, Ml, Mm)) {
    throw Error(ErrorKind::SchemaError, "model: matrix sizes do not match Mn = " + std::to_string(Mn) +
                                            ", Mm = " + std::to_string(Mm) + ", Ml = " + std::to_string(Ml) +
                                            " implied by the declared rates");
  }
  if (j.contains("T")) {
    f.T = matrix_from_json(j.at("T"), "model.T");
    if (!shape_ok(*f.T, Mn, Mn)) throw Error(ErrorKind::SchemaError, "model: T must be Mn x Mn");
  }
  f.convention = convention_from_string(io::field_or<std::string>(j, "convention", "example", ctx), "model.convention");
  if (j.contains("provenance")) {
    f.seed = io::field_or<std::uint64_t>(j["provenance"], "seed", 0, "model.provenance");
    f.N = io::field_or<int>(j["provenance"], "N", 0, "model.provenance");
  }
  if (j.contains("identification")) {
    const Json& d = j["identification"];
    f.model.block_rows = io::field_or<int>(d, "block_rows", 0, "model.identification");
    f.model.order_gap = io::field_or<double>(d, "order_gap", 0.0, "model.identification");
    f.model.order_exposed = io::field_or<bool>(d, "order_exposed", true, "model.identification");
    f.model.input_hankel_rank = io::field_or<int>(d, "input_hankel_rank", 0, "model.identification");
    const auto sv = io::field_or<std::vector<double>>(d, "singular_values", {}, "model.identification");
    f.model.singular_values = Eigen::Map<const Vector>(sv.data(), static_cast<Eigen::Index>(sv.size()));
  }
  return f;
}

inline void save_model(const std::string& path, const ModelFile& f) { io::write_text(path, model_to_json(f).dump(2) + "\n"); }

inline ModelFile load_model(const std::string& path) { return model_from_json(io::parse_json(io::read_text(path), path)); }

}  // namespace mrid

#endif  // MRID_IO_HPP
