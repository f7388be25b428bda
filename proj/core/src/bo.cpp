#include "dagvae/bo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <set>

#include "dagvae/canonical.hpp"
#include "dagvae/decoder.hpp"
#include "dagvae/encoder.hpp"
#include "dagvae/error.hpp"
#include "dagvae/parallel.hpp"
#include "dagvae/rng.hpp"

namespace dagvae {

Oracle tabular_oracle(const std::vector<BenchRecord>& records) {
  auto table = std::make_shared<std::map<GraphKey, ArchMetrics>>();
  for (const auto& r : records)
    if (r.metrics) table->emplace(canonical_key(r.graph), *r.metrics);
  return [table](const ArchGraph& g) -> std::optional<ArchMetrics> {
    auto it = table->find(canonical_key(g));
    if (it == table->end()) return std::nullopt;
    return it->second;
  };
}

namespace {

using Clock = std::chrono::steady_clock;

struct Tracker {
  const Oracle& oracle;
  BoResult result;
  std::set<GraphKey> tried;
  bool any = false;
  Clock::time_point start = Clock::now();

  void evaluate(const ArchGraph& g, const GraphKey& key) {
    if (!tried.insert(key).second) return;
    auto metrics = oracle(g);
    if (!metrics) {
      result.oracle_misses.push_back(key_hash(key));
      return;
    }
    result.evaluated.push_back({g, *metrics});
    if (!any || metrics->val_acc > result.best_val) {
      result.best_val = metrics->val_acc;
      result.best_test = metrics->test_acc;
      any = true;
    }
  }
  void log(int iteration) {
    result.history.push_back({iteration, static_cast<int>(result.evaluated.size()), result.best_val,
                              result.best_test, std::chrono::duration<double>(Clock::now() - start).count()});
  }
};

}  // namespace

BoResult bo_loop(const Model& m, const Oracle& oracle, const std::vector<ArchGraph>& seed_set,
                 const std::vector<ArchGraph>& pool_in, const BoConfig& c) {
  if (c.iterations < 0 || c.batch < 1) throw Error(ErrorKind::ConfigError, "bo: iterations >= 0, batch >= 1");
  Tracker tr{oracle, {}, {}, false, Clock::now()};

  struct Candidate {
    ArchGraph graph;
    GraphKey key;
    Vector z;
  };
  std::vector<Candidate> pool(pool_in.size());
  parallel_for(
      pool.size(),
      [&](std::size_t i) {
        pool[i].graph = canonicalize(pool_in[i]);
        pool[i].key = labeling_key(pool[i].graph);
        pool[i].z = encode(m, pool[i].graph).mean;
      },
      c.threads);
  std::map<GraphKey, Vector> latent;
  for (const auto& p : pool) latent.emplace(p.key, p.z);

  Rng rng(mix_seed(c.seed, 0x626f));
  if (!seed_set.empty()) {
    for (const auto& g : seed_set) {
      ArchGraph cg = canonicalize(g);
      GraphKey k = labeling_key(cg);
      if (!latent.count(k)) latent.emplace(k, encode(m, cg).mean);
      tr.evaluate(cg, k);
    }
  } else {
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(idx);
    const std::size_t n0 = std::min(pool.size(), static_cast<std::size_t>(c.initial > 0 ? c.initial : c.batch));
    for (std::size_t i = 0; i < n0; ++i) tr.evaluate(pool[idx[i]].graph, pool[idx[i]].key);
  }
  tr.log(0);

  for (int it = 1; it <= c.iterations; ++it) {
    std::vector<Candidate> cands;
    for (const auto& p : pool)
      if (!tr.tried.count(p.key)) cands.push_back(p);
    if (c.prior_samples > 0) {
      Rng prng(mix_seed(c.seed, 0x7072696f72 + static_cast<std::uint64_t>(it)));
      std::set<GraphKey> seen;
      for (const auto& p : cands) seen.insert(p.key);
      for (int s = 0; s < c.prior_samples; ++s) {
        const Vector z = standard_normal(m.config().d_z, prng);
        ArchGraph g = decode(m, z, DecodeMode::Sample, prng);
        if (!check_validity(g, m.space()).is_valid) continue;
        GraphKey k = labeling_key(g);
        if (tr.tried.count(k) || !seen.insert(k).second) continue;
        Vector mean = encode(m, g).mean;
        cands.push_back({std::move(g), std::move(k), std::move(mean)});
      }
    }
    if (cands.empty()) {
      tr.log(it);
      continue;
    }
    std::vector<Vector> xs;
    std::vector<double> ys;
    for (const auto& e : tr.result.evaluated) {
      GraphKey k = labeling_key(e.graph);
      auto l = latent.find(k);
      xs.push_back(l != latent.end() ? l->second : encode(m, e.graph).mean);
      ys.push_back(e.metrics.val_acc);
    }
    std::vector<double> ei(cands.size(), 0.0);
    if (xs.size() >= 2) {
      GpConfig gc = c.gp;
      gc.seed = mix_seed(c.gp.seed ^ c.seed, static_cast<std::uint64_t>(it));
      const GpSurrogate gp = GpSurrogate::fit(xs, ys, gc);
      parallel_for(
          cands.size(),
          [&](std::size_t i) {
            const GpPrediction p = gp.predict(cands[i].z);
            ei[i] = expected_improvement(p.mean, std::sqrt(p.var), tr.result.best_val);
          },
          c.threads);
    }
    std::vector<std::size_t> order(cands.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (ei[a] != ei[b]) return ei[a] > ei[b];
      return cands[a].key < cands[b].key;
    });
    for (std::size_t i = 0; i < order.size() && i < static_cast<std::size_t>(c.batch); ++i) {
      const Candidate& cd = cands[order[i]];
      latent.emplace(cd.key, cd.z);
      tr.evaluate(cd.graph, cd.key);
    }
    tr.log(it);
  }
  return std::move(tr.result);
}

BoResult random_search(const Oracle& oracle, const std::vector<ArchGraph>& pool, const BoConfig& c) {
  Tracker tr{oracle, {}, {}, false, Clock::now()};
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(mix_seed(c.seed, 0x72616e64));
  rng.shuffle(idx);
  std::size_t next = 0;
  auto draw = [&](int k) {
    for (int i = 0; i < k && next < idx.size(); ++i, ++next) {
      ArchGraph g = canonicalize(pool[idx[next]]);
      tr.evaluate(g, labeling_key(g));
    }
  };
  draw(c.initial > 0 ? c.initial : c.batch);
  tr.log(0);
  for (int it = 1; it <= c.iterations; ++it) {
    draw(c.batch);
    tr.log(it);
  }
  return std::move(tr.result);
}

void write_bo_history(const std::string& path, const std::vector<BoHistoryRow>& history) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write '" + path + "'");
  out << "iteration,evaluations_so_far,best_val,best_test,wallclock_s\n" << std::setprecision(17);
  for (const auto& r : history)
    out << r.iteration << ',' << r.evaluations << ',' << r.best_val << ',' << r.best_test << ','
        << std::setprecision(6) << r.wallclock_s << std::setprecision(17) << '\n';
}

}  // namespace dagvae
