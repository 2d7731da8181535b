#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "delaycert/delay_analysis.hpp"
#include "delaycert/feasibility.hpp"
#include "delaycert/io.hpp"
#include "delaycert/simulate.hpp"

namespace {

using namespace delaycert;

constexpr int kExitOk = 0;        // success / condition holds
constexpr int kExitNegative = 1;  // clean run, method answer is negative
constexpr int kExitUsage = 2;     // malformed input or usage error

XStructure parse_structure(const std::string& s) {
  if (s == "full") return XStructure::full;
  if (s == "blockdiag") return XStructure::block_diagonal;
  throw std::invalid_argument("--x-structure must be 'full' or 'blockdiag'");
}

FeasibilityOptions default_options() {
  FeasibilityOptions opt;
  const char* env = std::getenv("DELAYCERT_VERBOSE");
  opt.barrier.verbose = env != nullptr && std::string(env) != "0";
  return opt;
}

void print_margins(const StabilityCertificate& cert) {
  const auto& m = cert.margins;
  std::printf("solver_status: %s\n", to_string(cert.solver_status));
  std::printf("solver_margin: %.6e (gap %.1e)\n", cert.solver_margin,
              cert.solver_gap);
  std::printf("min_eig P  = %.6e\n", m.min_eig_p);
  std::printf("min_eig Q1 = %.6e   min_eig Q2 = %.6e\n", m.min_eig_q1,
              m.min_eig_q2);
  std::printf("min_eig R1 = %.6e   min_eig R2 = %.6e\n", m.min_eig_r1,
              m.min_eig_r2);
  std::printf("min_eig S1 = %.6e   min_eig S2 = %.6e\n", m.min_eig_s1,
              m.min_eig_s2);
  std::printf("min_eig coupling block = %.6e\n", m.min_eig_rcc);
  std::printf("max_eig Pi(h1) = %.6e   max_eig Pi(h2) = %.6e\n",
              m.max_eig_pi_h1, m.max_eig_pi_h2);
  std::printf("verified: %s\n", cert.verified ? "yes" : "no");
}

int cmd_check(const std::string& file, const std::string& xs,
              const std::string& out_path) {
  const auto desc = io::load_system(file);
  const auto sys = desc.to_system();
  auto cert = solve(pose(sys, parse_structure(xs), default_options()));
  print_margins(cert);
  if (!out_path.empty())
    io::save_json(io::certificate_to_json(cert, desc.name), out_path);
  return cert.solver_status == SolverStatus::feasible ? kExitOk
                                                      : kExitNegative;
}

int cmd_maxdelay(const std::string& file, std::vector<long> h1_list,
                 long limit, const std::string& xs, const std::string& out_path,
                 int jobs) {
  const auto desc = io::load_system(file);
  if (h1_list.empty()) h1_list = {desc.h1};
  auto rows = table_sweep(desc.a, desc.ad, h1_list, limit,
                          parse_structure(xs), default_options(), jobs);
  if (out_path.empty()) {
    write_sweep_csv(std::cout, rows);
  } else {
    std::ofstream out(out_path);
    require(out.good(), "cannot write file: " + out_path);
    write_sweep_csv(out, rows);
  }
  write_sweep_table(std::cerr, rows);
  return kExitOk;
}

int cmd_simulate(const std::string& file, const std::string& cert_path,
                 const std::string& kind, long constant_h,
                 const std::string& delay_list, std::uint64_t seed, long steps,
                 std::vector<double> init, const std::string& out_path) {
  const auto desc = io::load_system(file);
  const auto sys = desc.to_system();
  if (init.empty()) init.assign(static_cast<std::size_t>(sys.n()), 1.0);
  if (static_cast<Index>(init.size()) != sys.n()) {
    std::ostringstream os;
    os << "--init needs " << sys.n() << " entries, got " << init.size();
    throw std::invalid_argument(os.str());
  }
  Vec x0(sys.n());
  for (Index i = 0; i < sys.n(); ++i) x0[i] = init[static_cast<std::size_t>(i)];

  DelaySequence delays = [&]() {
    if (kind == "constant")
      return DelaySequence::constant(constant_h > 0 ? constant_h : sys.h1,
                                     sys.h1, sys.h2);
    if (kind == "uniform") return DelaySequence::uniform_random(seed, sys.h1, sys.h2);
    if (kind == "sinusoidal") return DelaySequence::sinusoidal(sys.h1, sys.h2);
    if (kind == "explicit") {
      std::vector<long> hs;
      std::stringstream ss(delay_list);
      for (std::string tok; std::getline(ss, tok, ',');)
        hs.push_back(std::stol(tok));
      return DelaySequence::explicit_list(std::move(hs), sys.h1, sys.h2);
    }
    throw std::invalid_argument(
        "--delays must be constant|uniform|sinusoidal|explicit");
  }();

  std::vector<Vec> phi(static_cast<std::size_t>(sys.h2 + 1), x0);
  auto traj = simulate(sys, delays, phi, steps);

  const LkfVariables<double>* vars = nullptr;
  LkfVariables<double> loaded;
  if (!cert_path.empty()) {
    std::ifstream in(cert_path);
    require(in.good(), "cannot open certificate: " + cert_path);
    auto cert = io::certificate_from_json(nlohmann::json::parse(in));
    require(cert.system.n() == sys.n(),
            "certificate dimension does not match the system");
    loaded = cert.vars;
    vars = &loaded;
  }

  if (out_path.empty()) {
    io::write_trajectory_csv(std::cout, traj, vars);
  } else {
    std::ofstream out(out_path);
    require(out.good(), "cannot write file: " + out_path);
    io::write_trajectory_csv(out, traj, vars);
  }
  return kExitOk;
}

int cmd_verify(const std::string& file, const std::string& cert_path) {
  const auto desc = io::load_system(file);
  std::ifstream in(cert_path);
  require(in.good(), "cannot open certificate: " + cert_path);
  auto cert = io::certificate_from_json(nlohmann::json::parse(in));
  require(cert.system.n() == desc.n,
          "certificate dimension does not match the system file");
  require((cert.system.a - desc.a).cwiseAbs().maxCoeff() <= 1e-12 &&
              (cert.system.ad - desc.ad).cwiseAbs().maxCoeff() <= 1e-12,
          "certificate system matrices do not match the system file");
  auto [margins, ok] = verify_certificate(cert.system, cert.vars,
                                          default_options());
  StabilityCertificate fresh = cert;
  fresh.margins = margins;
  fresh.verified = ok;
  print_margins(fresh);
  return ok ? kExitOk : kExitNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "delaycert: stability certification for linear discrete-time systems "
      "with interval time-varying delays"};
  app.require_subcommand(1);

  std::string file, xs = "full", out_path, cert_path;
  std::string kind = "uniform", delay_list;
  std::vector<long> h1_list;
  std::vector<double> init;
  long limit = 1000, constant_h = 0, steps = 1000;
  std::uint64_t seed = 12345;
  int jobs = 1;

  auto* check = app.add_subcommand("check",
                                   "decide admissibility at the file's "
                                   "(h1, h2) and emit a certificate");
  check->add_option("file", file, "system description JSON")->required();
  check->add_option("--x-structure", xs, "full|blockdiag");
  check->add_option("--out", out_path, "write certificate JSON here");

  auto add_maxdelay = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("file", file, "system description JSON")->required();
    cmd->add_option("--h1", h1_list, "lower delay bounds to sweep")
        ->delimiter(',');
    cmd->add_option("--limit", limit, "search cap for h2");
    cmd->add_option("--x-structure", xs, "full|blockdiag");
    cmd->add_option("--out", out_path, "write CSV here instead of stdout");
    cmd->add_option("--jobs", jobs, "parallel sweep entries");
    return cmd;
  };
  auto* maxdelay = add_maxdelay(
      "maxdelay", "search the maximal admissible h2 for each h1");
  auto* sweep = add_maxdelay("sweep", "alias of maxdelay");

  auto* sim = app.add_subcommand("simulate", "roll out a delayed trajectory");
  sim->add_option("file", file, "system description JSON")->required();
  sim->add_option("--cert", cert_path,
                  "certificate JSON; adds the energy column V");
  sim->add_option("--delays", kind, "constant|uniform|sinusoidal|explicit");
  sim->add_option("--constant", constant_h, "value for --delays constant");
  sim->add_option("--delay-list", delay_list,
                  "comma-separated values for --delays explicit");
  sim->add_option("--seed", seed, "seed for --delays uniform");
  sim->add_option("--steps", steps, "number of steps");
  sim->add_option("--init", init, "initial state (constant history)")
      ->delimiter(',');
  sim->add_option("--out", out_path, "write trajectory CSV here");

  auto* verify = app.add_subcommand(
      "verify", "re-verify a stored certificate against a system file");
  verify->add_option("file", file, "system description JSON")->required();
  verify->add_option("cert", cert_path, "certificate JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(check)) return cmd_check(file, xs, out_path);
    if (app.got_subcommand(maxdelay) || app.got_subcommand(sweep))
      return cmd_maxdelay(file, h1_list, limit, xs, out_path, jobs);
    if (app.got_subcommand(sim))
      return cmd_simulate(file, cert_path, kind, constant_h, delay_list, seed,
                          steps, init, out_path);
    if (app.got_subcommand(verify)) return cmd_verify(file, cert_path);
  } catch (const nlohmann::json::parse_error& ex) {
    std::cerr << "input error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
