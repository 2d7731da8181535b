#pragma once

#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "delaycert/feasibility.hpp"
#include "delaycert/simulate.hpp"
#include "delaycert/types.hpp"

namespace delaycert::io {

using ordered_json = nlohmann::ordered_json;

/// System description file: name, n, A and Ad as row-major arrays of n^2
/// reals, h1, and optionally h2.
struct SystemDescription {
  std::string name;
  Index n = 0;
  Mat a, ad;
  long h1 = 1;
  std::optional<long> h2;

  DelaySystem<double> to_system() const {
    require(h2.has_value(), "system description has no h2");
    DelaySystem<double> sys{a, ad, h1, *h2};
    sys.validate();
    return sys;
  }

  DelaySystem<double> to_system(long h2_value) const {
    DelaySystem<double> sys{a, ad, h1, h2_value};
    sys.validate();
    return sys;
  }
};

namespace detail {

inline Mat mat_from_row_major(const nlohmann::json& arr, Index rows,
                              Index cols, const std::string& what) {
  require(arr.is_array() && static_cast<Index>(arr.size()) == rows * cols,
          what + ": expected a row-major array of " +
              std::to_string(rows * cols) + " reals");
  Mat m(rows, cols);
  Index at = 0;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      m(r, c) = arr[static_cast<std::size_t>(at++)].get<double>();
  return m;
}

inline nlohmann::json row_major(const Mat& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  return arr;
}

}  // namespace detail

inline SystemDescription system_from_json(const nlohmann::json& j) {
  SystemDescription d;
  d.name = j.value("name", "");
  require(j.contains("n") && j["n"].is_number_integer(),
          "system description: integer field 'n' is required");
  d.n = j["n"].get<Index>();
  require(d.n >= 1, "system description: n must be >= 1");
  require(j.contains("A") && j.contains("Ad"),
          "system description: fields 'A' and 'Ad' are required");
  d.a = detail::mat_from_row_major(j["A"], d.n, d.n, "A");
  d.ad = detail::mat_from_row_major(j["Ad"], d.n, d.n, "Ad");
  require(j.contains("h1"), "system description: field 'h1' is required");
  d.h1 = j["h1"].get<long>();
  require(d.h1 >= 1, "system description: h1 must be >= 1");
  if (j.contains("h2") && !j["h2"].is_null()) {
    d.h2 = j["h2"].get<long>();
    require(*d.h2 >= d.h1, "system description: h2 must be >= h1");
  }
  return d;
}

inline ordered_json system_to_json(const SystemDescription& d) {
  ordered_json j;
  j["name"] = d.name;
  j["n"] = d.n;
  j["A"] = detail::row_major(d.a);
  j["Ad"] = detail::row_major(d.ad);
  j["h1"] = d.h1;
  if (d.h2) j["h2"] = *d.h2;
  return j;
}

inline SystemDescription load_system(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open system file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);  // throws with line/column
  return system_from_json(j);
}

inline ordered_json matrix_entry(const Mat& m) {
  ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = detail::row_major(m);
  return j;
}

inline Mat matrix_from_entry(const nlohmann::json& j, const std::string& what) {
  require(j.contains("rows") && j.contains("cols") && j.contains("data"),
          what + ": expected {rows, cols, data}");
  return detail::mat_from_row_major(j["data"], j["rows"].get<Index>(),
                                    j["cols"].get<Index>(), what);
}

inline ordered_json certificate_to_json(const StabilityCertificate& cert,
                                        const std::string& name = "") {
  ordered_json j;
  ordered_json sys;
  sys["name"] = name;
  sys["n"] = cert.system.n();
  sys["A"] = detail::row_major(cert.system.a);
  sys["Ad"] = detail::row_major(cert.system.ad);
  j["system"] = sys;
  j["h1"] = cert.system.h1;
  j["h2"] = cert.system.h2;
  j["x_structure"] = to_string(cert.vars.x_structure);
  ordered_json mats;
  mats["P"] = matrix_entry(cert.vars.p);
  mats["Q1"] = matrix_entry(cert.vars.q1);
  mats["Q2"] = matrix_entry(cert.vars.q2);
  mats["R1"] = matrix_entry(cert.vars.r1);
  mats["R2"] = matrix_entry(cert.vars.r2);
  mats["S1"] = matrix_entry(cert.vars.s1);
  mats["S2"] = matrix_entry(cert.vars.s2);
  mats["X"] = matrix_entry(cert.vars.x);
  j["matrices"] = mats;
  ordered_json mg;
  mg["min_eig_P"] = cert.margins.min_eig_p;
  mg["min_eig_Q1"] = cert.margins.min_eig_q1;
  mg["min_eig_Q2"] = cert.margins.min_eig_q2;
  mg["min_eig_R1"] = cert.margins.min_eig_r1;
  mg["min_eig_R2"] = cert.margins.min_eig_r2;
  mg["min_eig_S1"] = cert.margins.min_eig_s1;
  mg["min_eig_S2"] = cert.margins.min_eig_s2;
  mg["min_eig_rcc"] = cert.margins.min_eig_rcc;
  mg["max_eig_pi_h1"] = cert.margins.max_eig_pi_h1;
  mg["max_eig_pi_h2"] = cert.margins.max_eig_pi_h2;
  j["margins"] = mg;
  j["verified"] = cert.verified;
  j["solver_status"] = to_string(cert.solver_status);
  j["solver_margin"] = cert.solver_margin;
  j["solver_gap"] = cert.solver_gap;
  return j;
}

inline StabilityCertificate certificate_from_json(const nlohmann::json& j) {
  StabilityCertificate cert;
  require(j.contains("system") && j.contains("matrices"),
          "certificate: fields 'system' and 'matrices' are required");
  const auto& sys = j["system"];
  const Index n = sys["n"].get<Index>();
  cert.system.a = detail::mat_from_row_major(sys["A"], n, n, "A");
  cert.system.ad = detail::mat_from_row_major(sys["Ad"], n, n, "Ad");
  cert.system.h1 = j["h1"].get<long>();
  cert.system.h2 = j["h2"].get<long>();
  cert.system.validate();
  const auto& mats = j["matrices"];
  cert.vars.p = matrix_from_entry(mats["P"], "P");
  cert.vars.q1 = matrix_from_entry(mats["Q1"], "Q1");
  cert.vars.q2 = matrix_from_entry(mats["Q2"], "Q2");
  cert.vars.r1 = matrix_from_entry(mats["R1"], "R1");
  cert.vars.r2 = matrix_from_entry(mats["R2"], "R2");
  cert.vars.s1 = matrix_from_entry(mats["S1"], "S1");
  cert.vars.s2 = matrix_from_entry(mats["S2"], "S2");
  cert.vars.x = matrix_from_entry(mats["X"], "X");
  cert.vars.x_structure = j.value("x_structure", "full") == "blockdiag"
                              ? XStructure::block_diagonal
                              : XStructure::full;
  if (j.contains("margins")) {
    const auto& mg = j["margins"];
    cert.margins.min_eig_p = mg.value("min_eig_P", 0.0);
    cert.margins.min_eig_q1 = mg.value("min_eig_Q1", 0.0);
    cert.margins.min_eig_q2 = mg.value("min_eig_Q2", 0.0);
    cert.margins.min_eig_r1 = mg.value("min_eig_R1", 0.0);
    cert.margins.min_eig_r2 = mg.value("min_eig_R2", 0.0);
    cert.margins.min_eig_s1 = mg.value("min_eig_S1", 0.0);
    cert.margins.min_eig_s2 = mg.value("min_eig_S2", 0.0);
    cert.margins.min_eig_rcc = mg.value("min_eig_rcc", 0.0);
    cert.margins.max_eig_pi_h1 = mg.value("max_eig_pi_h1", 0.0);
    cert.margins.max_eig_pi_h2 = mg.value("max_eig_pi_h2", 0.0);
  }
  cert.verified = j.value("verified", false);
  const std::string st = j.value("solver_status", "numerical-failure");
  cert.solver_status = st == "feasible"    ? SolverStatus::feasible
                       : st == "infeasible" ? SolverStatus::infeasible
                                            : SolverStatus::numerical_failure;
  cert.solver_margin = j.value("solver_margin", 0.0);
  cert.solver_gap = j.value("solver_gap", 0.0);
  return cert;
}

inline void save_json(const ordered_json& j, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot write file: " + path);
  out << j.dump(2) << "\n";
}

/// Trajectory CSV: header "k,h_k,x_1,...,x_n[,V]"; one row per simulated
/// step k = 0..K-1. The V column is emitted when variables are supplied.
template <class Scalar>
void write_trajectory_csv(std::ostream& out, const Trajectory<Scalar>& traj,
                          const LkfVariables<Scalar>* vars = nullptr) {
  const Index n = traj.system().n();
  out << "k,h_k";
  for (Index i = 1; i <= n; ++i) out << ",x_" << i;
  if (vars) out << ",V";
  out << "\n";
  out.precision(17);
  for (long k = 0; k < traj.steps(); ++k) {
    out << k << "," << traj.delay(k);
    for (Index i = 0; i < n; ++i) out << "," << traj.state(k)[i];
    if (vars) out << "," << lkf_value(traj, *vars, k);
    out << "\n";
  }
}

}  // namespace delaycert::io
