#pragma once

#include <atomic>
#include <map>
#include <optional>
#include <ostream>
#include <thread>
#include <vector>

#include "delaycert/feasibility.hpp"
#include "delaycert/types.hpp"

namespace delaycert {

struct DelayProbe {
  long h2;
  SolverStatus status;
  bool verified;
  double margin;
  double gap;
};

struct DelayBoundResult {
  long h1 = 0;
  std::optional<long> h2_max;     // largest admissible upper delay bound
  long h2_max_verified = 0;       // largest bound whose certificate passes
                                  // strict eigenvalue verification
  bool at_limit = false;
  XStructure x_structure = XStructure::full;
  std::vector<DelayProbe> log;    // every probe made, in probe order
  StabilityCertificate certificate;  // stored at (h1, h2_max)
};

namespace detail {

struct ProbeCache {
  std::map<long, DelayProbe> by_h2;
};

inline const DelayProbe& probe(const Mat& a, const Mat& ad, long h1, long h2,
                               XStructure xs, const FeasibilityOptions& base,
                               ProbeCache& cache,
                               std::vector<DelayProbe>& log) {
  auto it = cache.by_h2.find(h2);
  if (it != cache.by_h2.end()) return it->second;
  FeasibilityOptions opt = base;
  // decision probes only need the threshold comparison settled
  opt.barrier.stop_when_above = opt.margin_threshold;
  opt.barrier.stop_when_below = opt.margin_threshold;
  DelaySystem<double> sys{a, ad, h1, h2};
  const StabilityCertificate cert = solve(pose(sys, xs, opt));
  DelayProbe p{h2, cert.solver_status, cert.verified, cert.solver_margin,
               cert.solver_gap};
  log.push_back(p);
  return cache.by_h2.emplace(h2, p).first->second;
}

inline bool admissible(const DelayProbe& p) {
  return p.status == SolverStatus::feasible;
}

}  // namespace detail

/// Largest h2 <= search_limit admissible for the given h1: exponential
/// expansion from h1, binary search on the bracket, then a linear
/// confirmation pass around the candidate (feasibility is not assumed
/// monotone in h2). Every reported bound is backed by a freshly solved,
/// stored certificate.
inline DelayBoundResult max_delay(const Mat& a, const Mat& ad, long h1,
                                  long search_limit, XStructure xs,
                                  const FeasibilityOptions& opt = {}) {
  require(h1 >= 1, "max_delay: h1 must be >= 1");
  require(search_limit >= h1, "max_delay: search_limit must be >= h1");
  DelayBoundResult out;
  out.h1 = h1;
  out.x_structure = xs;
  out.h2_max_verified = h1 - 1;

  detail::ProbeCache cache;
  auto check = [&](long h2) {
    return detail::admissible(
        detail::probe(a, ad, h1, h2, xs, opt, cache, out.log));
  };

  if (!check(h1)) {
    out.h2_max = std::nullopt;
    return out;
  }

  long lo = h1;
  long hi = h1;
  while (hi < search_limit) {
    hi = std::min(search_limit, h1 + std::max(1L, 2 * (hi - h1 + 1)));
    if (check(hi)) {
      lo = hi;
    } else {
      break;
    }
  }
  if (lo == hi || lo == search_limit) {
    out.h2_max = lo;
    out.at_limit = (lo == search_limit);
  } else {
    while (hi - lo > 1) {
      const long mid = lo + (hi - lo) / 2;
      if (check(mid))
        lo = mid;
      else
        hi = mid;
    }
    out.h2_max = lo;
  }

  // confirmation pass around the candidate
  for (long h2 = std::max(h1, *out.h2_max - 2);
       h2 <= std::min(search_limit, *out.h2_max + 2); ++h2) {
    if (check(h2))
      out.h2_max = std::max(*out.h2_max, h2);
  }
  out.at_limit = (*out.h2_max == search_limit);

  // full-precision certificate at the reported bound, plus the largest
  // strictly verified bound seen anywhere below it
  DelaySystem<double> sys{a, ad, h1, *out.h2_max};
  out.certificate = solve(pose(sys, xs, opt));
  for (long h2 = *out.h2_max; h2 >= h1; --h2) {
    DelaySystem<double> s2{a, ad, h1, h2};
    const auto cert = solve(pose(s2, xs, opt));
    if (cert.verified) {
      out.h2_max_verified = h2;
      break;
    }
    if (h2 <= *out.h2_max - 6) break;  // verified frontier not nearby
  }
  return out;
}

/// One max_delay per h1 entry; entries are independent and may run on a
/// small thread pool. Results are ordered by the input list.
inline std::vector<DelayBoundResult> table_sweep(
    const Mat& a, const Mat& ad, const std::vector<long>& h1_list,
    long search_limit, XStructure xs, const FeasibilityOptions& opt = {},
    int jobs = 1) {
  require(!h1_list.empty(), "table_sweep: h1 list must be nonempty");
  std::vector<DelayBoundResult> results(h1_list.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= h1_list.size()) return;
      results[i] = max_delay(a, ad, h1_list[i], search_limit, xs, opt);
    }
  };
  const int nthreads =
      std::max(1, std::min<int>(jobs, static_cast<int>(h1_list.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return results;
}

/// CSV: header "h1,h2_max,x_structure,verified"; one row per entry.
inline void write_sweep_csv(std::ostream& out,
                            const std::vector<DelayBoundResult>& rows) {
  out << "h1,h2_max,x_structure,verified\n";
  for (const auto& r : rows) {
    out << r.h1 << ",";
    if (r.h2_max)
      out << *r.h2_max;
    else
      out << "none";
    out << "," << to_string(r.x_structure) << ","
        << (r.certificate.verified ? "true" : "false") << "\n";
  }
}

inline void write_sweep_table(std::ostream& out,
                              const std::vector<DelayBoundResult>& rows) {
  out << "  h1   h2_max   structure   solver-margin   strictly-verified-up-to\n";
  for (const auto& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%4ld   %6s   %9s   %13.3e   %ld%s\n",
                  r.h1,
                  r.h2_max ? std::to_string(*r.h2_max).c_str() : "none",
                  to_string(r.x_structure), r.certificate.solver_margin,
                  r.h2_max_verified, r.at_limit ? "   (at-limit)" : "");
    out << buf;
  }
}

}  // namespace delaycert
