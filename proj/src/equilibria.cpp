#include "cgap/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <thread>

namespace cgap {

namespace {

bool vc_satisfied(const Interpretation& i, const GroundProgram& gp) {
  for (const auto& vc : gp.vcs)
    if (!satisfies(i, vc)) return false;
  return true;
}

bool equilibrium_condition(const Interpretation& i, const GroundProgram& gp) {
  for (const auto& vc : gp.vcs) {
    double got = 0.0;
    for (AtomId b : vc.heads) got += i[b];
    double best = 0.0;
    for (AtomId a : vc.bodies) best = std::max(best, i[a]);
    if (got < best - kEpsEq) return false;
  }
  return true;
}

State decode_state(const GroundProgram& gp, std::int64_t idx) {
  State s(gp.vcs.size(), 0);
  for (size_t k = gp.vcs.size(); k-- > 0;) {
    int m = gp.vcs[k].m();
    s[k] = static_cast<int>(idx % m);
    idx /= m;
  }
  return s;
}

void advance_state(const GroundProgram& gp, State& s) {
  for (size_t k = s.size(); k-- > 0;) {
    if (++s[k] < gp.vcs[k].m()) return;
    s[k] = 0;
  }
}

EnumerationResult enumerate_impl(const GroundProgram& gp, const EnumOptions& opts,
                                 bool strong_only) {
  double total_d = 1.0;
  for (const auto& vc : gp.vcs) total_d *= vc.m();
  if (total_d > static_cast<double>(opts.cap))
    throw CapExceededError("choice-vector space exceeds the enumeration cap (" +
                           std::to_string(opts.cap) + ")");
  std::int64_t total = static_cast<std::int64_t>(total_d);

  auto scan = [&](std::int64_t begin, std::int64_t end, std::vector<Solution>& out) {
    State s = decode_state(gp, begin);
    for (std::int64_t idx = begin; idx < end; ++idx, advance_state(gp, s)) {
      Interpretation mm = induced_fixpoint_strict(gp, s);
      if (!vc_satisfied(mm, gp)) continue;
      if (strong_only && !equilibrium_condition(mm, gp)) continue;
      out.push_back({s, std::move(mm)});
    }
  };

  EnumerationResult res;
  res.explored = total;
  int jobs = std::max(1, opts.jobs);
  if (jobs == 1 || total < 2 * jobs) {
    scan(0, total, res.items);
  } else {
    std::vector<std::vector<Solution>> parts(static_cast<size_t>(jobs));
    std::vector<std::exception_ptr> errs(static_cast<size_t>(jobs));
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w) {
      std::int64_t begin = total * w / jobs;
      std::int64_t end = total * (w + 1) / jobs;
      workers.emplace_back([&, w, begin, end] {
        try {
          scan(begin, end, parts[static_cast<size_t>(w)]);
        } catch (...) {
          errs[static_cast<size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    for (const auto& e : errs)
      if (e) std::rethrow_exception(e);
    for (auto& p : parts)
      for (auto& sol : p) res.items.push_back(std::move(sol));
  }

  if (opts.limit >= 0 && static_cast<std::int64_t>(res.items.size()) > opts.limit)
    res.items.resize(static_cast<size_t>(opts.limit));
  return res;
}

}  // namespace

EnumerationResult enumerate_coherent(const GroundProgram& gp, const EnumOptions& opts) {
  return enumerate_impl(gp, opts, false);
}

EnumerationResult enumerate_strong_equilibria(const GroundProgram& gp, const EnumOptions& opts) {
  return enumerate_impl(gp, opts, true);
}

std::vector<Solution> distinct_by_value(const std::vector<Solution>& sols) {
  std::vector<Solution> out;
  std::map<std::vector<std::int64_t>, bool> seen;
  for (const auto& s : sols) {
    std::vector<std::int64_t> key;
    key.reserve(s.model.size());
    for (double v : s.model.values())
      key.push_back(static_cast<std::int64_t>(std::llround(v / kEpsEq)));
    if (seen.emplace(std::move(key), true).second) out.push_back(s);
  }
  return out;
}

}  // namespace cgap
