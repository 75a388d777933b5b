#include "gapflag/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gapflag/errors.hpp"
#include "gapflag/sun_param.hpp"

namespace gapflag::io {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json matrix_to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ValidationError("matrix must be a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Json& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw ValidationError("matrix must be square");
    for (Eigen::Index k = 0; k < n; ++k) {
      const Json& e = row[k];
      if (e.is_number()) {
        m(i, k) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, k) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ValidationError("matrix entries must be [re, im] pairs");
      }
    }
  }
  return m;
}

Json vector_to_json(const RealVector& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

RealVector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ValidationError("expected an array of numbers");
  RealVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw ValidationError("expected an array of numbers");
    v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  }
  return v;
}

Json model_to_json(const LindbladModel& model) {
  Json out;
  out["n"] = model.dim();
  out["H"] = matrix_to_json(model.hamiltonian());
  Json jumps = Json::array();
  for (const auto& l : model.jumps()) jumps.push_back(matrix_to_json(l));
  out["jumps"] = std::move(jumps);
  out["rates"] = model.rates();
  return out;
}

LindbladModel model_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("model must be a JSON object");
  for (const char* key : {"n", "H"})
    if (!j.contains(key)) throw ValidationError(std::string("model is missing '") + key + "'");
  if (!j["n"].is_number_integer()) throw ValidationError("model 'n' must be an integer");
  const int n = j["n"].get<int>();
  if (n < 2) throw ValidationError("model 'n' must be at least 2");
  ComplexMatrix h = matrix_from_json(j["H"]);
  if (h.rows() != n) throw ValidationError("model 'H' does not have dimension n");
  std::vector<ComplexMatrix> jumps;
  std::vector<double> rates;
  if (j.contains("jumps")) {
    if (!j["jumps"].is_array()) throw ValidationError("model 'jumps' must be an array");
    for (const auto& l : j["jumps"]) {
      jumps.push_back(matrix_from_json(l));
      if (jumps.back().rows() != n) throw ValidationError("jump operator does not have dimension n");
    }
  }
  if (j.contains("rates")) {
    const RealVector v = vector_from_json(j["rates"]);
    rates.assign(v.data(), v.data() + v.size());
  }
  return LindbladModel(std::move(h), std::move(jumps), std::move(rates));
}

DensityMatrix state_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("state must be a JSON object");
  if (j.contains("rho")) return DensityMatrix(matrix_from_json(j["rho"]));
  if (!j.contains("r")) throw ValidationError("state needs either 'rho' or 'r'");
  const GapVector r(vector_from_json(j["r"]));
  if (!j.contains("U")) return assemble_density(r, ComplexMatrix::Identity(r.dim(), r.dim()));
  const ComplexMatrix u = matrix_from_json(j["U"]);
  if (u.rows() != r.dim()) throw ValidationError("frame 'U' does not match the gap vector");
  if (unitarity_defect(u) > 1e-10) throw ValidationError("frame 'U' is not unitary");
  return assemble_density(r, u);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("cannot parse '" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw IoError("write to '" + path + "' failed");
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const Header& header) {
  for (const auto& [key, value] : header) os << "# " << key << ": " << value << '\n';
  const int n = traj.gaps.empty() ? 0 : static_cast<int>(traj.gaps.front().size()) + 1;
  os << 't';
  for (int a = 1; a < n; ++a) os << ",r_" << a;
  os << ",purity_R,trace_error,min_gap\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const RealVector& r = traj.gaps[k];
    const RealVector p = RealVector::Constant(n, 1.0 / n) + jacobian_matrix(n) * r;
    const double purity = n / (2.0 * (n - 1)) * (p.array() - 1.0 / n).abs().sum();
    os << format_double(traj.times[k]);
    for (Eigen::Index a = 0; a < r.size(); ++a) os << ',' << format_double(r(a));
    os << ',' << format_double(purity) << ',' << format_double(traj.diagnostics[k].trace_error)
       << ',' << format_double(traj.diagnostics[k].min_gap) << '\n';
  }
}

void write_trajectory_states(std::ostream& os, const Trajectory& traj) {
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    Json line;
    line["t"] = traj.times[k];
    line["rho"] = matrix_to_json(traj.states[k]);
    if (k < traj.frames.size()) line["U"] = matrix_to_json(traj.frames[k]);
    os << line.dump() << '\n';
  }
}

}  // namespace gapflag::io
