#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "nlscatter/sweep.hpp"

namespace nlscatter {

namespace {

constexpr double kVerifyTol = 1e-10;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PointResult {
  std::vector<Branch> branches;
  std::vector<std::vector<std::string>> branch_flags;
  std::vector<std::string> point_flags;
  bool failed = false;
};

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '|' || ch == '\n' || ch == '"') ch = ' ';
  return s;
}

bool verify_branches(const std::vector<Branch>& xfer, const std::vector<Branch>& jost,
                     std::vector<std::vector<std::string>>& flags) {
  bool all_ok = xfer.size() == jost.size();
  for (std::size_t i = 0; i < xfer.size(); ++i) {
    const Branch* best = nullptr;
    for (const auto& b : jost)
      if (!best || std::abs(b.n - xfer[i].n) < std::abs(best->n - xfer[i].n)) best = &b;
    const bool ok = best && std::abs(best->R - xfer[i].R) <= kVerifyTol &&
                    std::abs(best->T - xfer[i].T) <= kVerifyTol;
    if (!ok) {
      flags[i].push_back("verify_mismatch");
      all_ok = false;
    }
  }
  return all_ok;
}

PointResult solve_point(const SweepConfig& cfg, double k, Side side) {
  PointResult out;
  try {
    const WaveNumber kk(k);
    const Incidence inc(side, cfg.absA);
    const auto opts = solve_options(cfg.solver);
    const auto set = rt_from_transfer(cfg.interaction, kk, inc, opts);
    out.branches = set.branches;
    out.branch_flags.resize(set.branches.size());
    for (std::size_t i = 0; i < set.branches.size(); ++i) {
      if (set.branches[i].tangent) out.branch_flags[i].push_back("tangent");
      if (set.branches[i].singular) out.branch_flags[i].push_back("singular");
    }
    if (set.diagnostics.window_exhausted) out.point_flags.push_back("window_exhausted");
    for (const auto& note : set.diagnostics.notes)
      if (note.find("rejected") != std::string::npos) out.point_flags.push_back("rejected_roots");
    if (cfg.verify) {
      SolveOptions jopts;
      jopts.scan = opts.scan;
      const auto jset = solve_scattering(cfg.interaction, kk, inc, jopts);
      if (!verify_branches(set.branches, jset.branches, out.branch_flags) &&
          set.branches.size() != jset.branches.size())
        out.point_flags.push_back("verify_count_mismatch");
    }
  } catch (const std::exception& e) {
    out = {};
    out.failed = true;
    out.point_flags.push_back("error:" + sanitize(e.what()));
  }
  return out;
}

}  // namespace

TransferSolveOptions solve_options(const SolverSettings& s) {
  TransferSolveOptions o;
  o.scan.window_max = s.window_max;
  o.scan.grid_n = s.grid_n;
  o.scan.residual_tol = s.tol;
  return o;
}

std::vector<std::vector<int>> continue_branches(const std::vector<std::vector<double>>& n_per_k) {
  std::vector<std::vector<int>> ids(n_per_k.size());
  int next_id = 0;
  const std::vector<double>* prev_n = nullptr;
  const std::vector<int>* prev_ids = nullptr;
  for (std::size_t i = 0; i < n_per_k.size(); ++i) {
    const auto& cur = n_per_k[i];
    ids[i].assign(cur.size(), -1);
    if (cur.empty()) continue;
    if (prev_n) {
      struct Pair {
        double d;
        std::size_t p, q;
      };
      std::vector<Pair> pairs;
      for (std::size_t p = 0; p < prev_n->size(); ++p)
        for (std::size_t q = 0; q < cur.size(); ++q)
          pairs.push_back({std::abs((*prev_n)[p] - cur[q]), p, q});
      std::stable_sort(pairs.begin(), pairs.end(),
                       [](const Pair& l, const Pair& r) { return l.d < r.d; });
      std::vector<bool> used(prev_n->size(), false);
      for (const auto& pr : pairs)
        if (!used[pr.p] && ids[i][pr.q] < 0) {
          used[pr.p] = true;
          ids[i][pr.q] = (*prev_ids)[pr.p];
        }
    }
    for (auto& id : ids[i])
      if (id < 0) id = next_id++;
    prev_n = &cur;
    prev_ids = &ids[i];
  }
  return ids;
}

SweepResult run_sweep(const SweepConfig& cfg) {
  const auto ks = cfg.k_grid.values();
  const auto sides = sides_of(cfg.side);
  const std::size_t total = ks.size() * sides.size();
  std::vector<PointResult> results(total);

  unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(total, 1)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t idx = next++; idx < total; idx = next++)
      results[idx] = solve_point(cfg, ks[idx % ks.size()], sides[idx / ks.size()]);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  SweepResult out;
  out.points = static_cast<int>(total);
  for (std::size_t s = 0; s < sides.size(); ++s) {
    std::vector<std::vector<double>> n_per_k(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i)
      for (const auto& b : results[s * ks.size() + i].branches) n_per_k[i].push_back(b.n);
    const auto ids = continue_branches(n_per_k);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const auto& pr = results[s * ks.size() + i];
      if (pr.failed) ++out.failed_points;
      std::vector<SweepRow> rows;
      if (pr.branches.empty()) {
        SweepRow row;
        row.k = ks[i];
        row.side = sides[s];
        row.n = row.absT2 = row.residual = kNaN;
        row.R = row.T = {kNaN, kNaN};
        row.flags = pr.point_flags;
        row.flags.insert(row.flags.begin(), "no_branch");
        rows.push_back(std::move(row));
      }
      for (std::size_t b = 0; b < pr.branches.size(); ++b) {
        const auto& br = pr.branches[b];
        SweepRow row;
        row.k = ks[i];
        row.side = sides[s];
        row.branch = ids[i][b];
        row.n = br.n;
        row.R = br.R;
        row.T = br.T;
        row.absT2 = br.T.real() * br.T.real() + br.T.imag() * br.T.imag();
        row.residual = br.residual;
        row.flags = pr.branch_flags[b];
        row.flags.insert(row.flags.end(), pr.point_flags.begin(), pr.point_flags.end());
        rows.push_back(std::move(row));
      }
      std::sort(rows.begin(), rows.end(),
                [](const SweepRow& l, const SweepRow& r) { return l.branch < r.branch; });
      out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    }
  }
  return out;
}

}  // namespace nlscatter
