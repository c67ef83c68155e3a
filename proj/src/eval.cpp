#include "tsp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "tsp/error.hpp"
#include "tsp/rng.hpp"

namespace tsp {

std::vector<VectorXd> extract_features(const EncoderDecoder& model,
                                       const Dataset& ds,
                                       const std::vector<std::uint32_t>& idx) {
  const auto B = static_cast<Eigen::Index>(ds.axis.bin_count);
  std::vector<VectorXd> out(idx.size());
  constexpr Eigen::Index kChunk = 512;
  for (std::size_t pos = 0; pos < idx.size();
       pos += static_cast<std::size_t>(kChunk)) {
    const auto nb = static_cast<Eigen::Index>(
        std::min<std::size_t>(kChunk, idx.size() - pos));
    MatrixXd xb(B, nb);
    for (Eigen::Index j = 0; j < nb; ++j)
      xb.col(j) = normalize_input(ds.histogram(idx[pos + j]));
    const auto [mean, logvar] = model.encode(xb);
    for (Eigen::Index j = 0; j < nb; ++j) out[pos + j] = mean.col(j);
  }
  return out;
}

namespace {

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

ClosedEvalResult eval_closed(const Dataset& ds, const EncoderDecoder& model,
                             const Skb& skb,
                             const SoftmaxClassifier& baseline,
                             const Splits& splits,
                             const std::string& config_hash) {
  std::set<std::uint32_t> skb_labels;
  for (const auto& e : skb.entries())
    skb_labels.insert(static_cast<std::uint32_t>(e.class_id));
  const std::set<std::uint32_t> base_labels(baseline.class_labels().begin(),
                                            baseline.class_labels().end());
  if (skb_labels != base_labels)
    throw StateError(
        "closed-set evaluation needs the SKB and the baseline to cover the "
        "same classes");

  std::vector<std::uint32_t> test_idx;
  for (std::uint32_t i : splits.test)
    if (skb_labels.count(ds.records[i].label)) test_idx.push_back(i);
  if (test_idx.empty()) throw StateError("no test samples to evaluate");

  const std::vector<VectorXd> features =
      extract_features(model, ds, test_idx);

  std::ostringstream log;
  log << "record,truth,snr_db,semantic,baseline\n";

  struct Cell {
    std::uint64_t n = 0, sem_ok = 0, base_ok = 0;
  };
  std::map<float, Cell> by_snr;

  for (std::size_t k = 0; k < test_idx.size(); ++k) {
    const auto& rec = ds.records[test_idx[k]];
    const int sem = match_class(skb, features[k]);
    const std::uint32_t base =
        baseline.classify(normalize_input(ds.histogram(test_idx[k])));
    Cell& cell = by_snr[rec.snr_db];
    ++cell.n;
    cell.sem_ok += (sem == static_cast<int>(rec.label));
    cell.base_ok += (base == rec.label);
    log << test_idx[k] << ',' << rec.label << ',' << format_double(rec.snr_db)
        << ',' << sem << ',' << base << '\n';
  }

  ClosedEvalResult result;
  result.table.x_name = "snr_db";
  for (const auto& [snr, cell] : by_snr) {
    result.table.rows.push_back(
        {"direct-classifier", snr,
         static_cast<double>(cell.base_ok) / static_cast<double>(cell.n),
         cell.n, config_hash});
    result.table.rows.push_back(
        {"semantic", snr,
         static_cast<double>(cell.sem_ok) / static_cast<double>(cell.n),
         cell.n, config_hash});
  }
  std::sort(result.table.rows.begin(), result.table.rows.end(),
            [](const ResultRow& a, const ResultRow& b) {
              return std::tie(a.method, a.x) < std::tie(b.method, b.x);
            });
  result.prediction_log = log.str();
  return result;
}

void OpenSetProtocol::validate() const {
  if (known_labels.empty())
    throw ConfigError("open-set protocol needs known classes");
  std::set<std::uint32_t> known(known_labels.begin(), known_labels.end());
  if (known.size() != known_labels.size())
    throw ConfigError("duplicate known labels");
  std::set<std::uint32_t> unknown(unknown_labels.begin(),
                                  unknown_labels.end());
  if (unknown.size() != unknown_labels.size())
    throw ConfigError("duplicate unknown labels");
  for (std::uint32_t u : unknown_labels)
    if (known.count(u))
      throw ConfigError("label " + std::to_string(u) +
                        " is both known and unknown");
  if (!(tau_target > 0.0) || !(tau_target < 1.0))
    throw ConfigError("tau_target must lie in (0, 1)");
  if (!(assign_radius > 0.0))
    throw ConfigError("assign_radius must be positive");
  if (maturity < 2) throw ConfigError("maturity must be at least 2");
}

StreamOutcome run_open_stream(const EncoderDecoder& model, const Skb& skb0,
                              const Dataset& ds,
                              const std::vector<std::uint32_t>& stream,
                              const std::vector<VectorXd>& feature_cache,
                              double tau, bool update_on,
                              const OpenSetProtocol& protocol,
                              std::uint64_t order_seed) {
  const std::set<std::uint32_t> known_set(protocol.known_labels.begin(),
                                          protocol.known_labels.end());
  const bool closed_world = protocol.unknown_labels.empty();
  const std::vector<char> skb0_bytes = skb0.to_bytes();

  std::vector<std::uint32_t> order = stream;
  Rng rng(order_seed);
  rng.shuffle(order.begin(), order.end());

  StreamOutcome out;
  out.tau = tau;
  out.final_skb = skb0;
  UnknownBuffer buffer(protocol.assign_radius, protocol.maturity);

  auto feature_of = [&](std::uint32_t rec) -> VectorXd {
    if (rec < feature_cache.size() && feature_cache[rec].size() > 0)
      return feature_cache[rec];
    return extract_feature(model, ds.histogram(rec));
  };

  for (std::uint32_t rec : order) {
    const VectorXd z = feature_of(rec);
    OpenLogEntry entry;
    entry.record = rec;
    entry.truth = ds.records[rec].label;
    if (closed_world) {
      // Degenerate protocol: pure semantic matching, no rejection.
      const Detection d = detect(out.final_skb, z, 0.0);
      entry.max_likelihood = d.max_likelihood;
      entry.decided_known = true;
      entry.predicted = match_class(out.final_skb, z);
    } else {
      const Detection d = detect(out.final_skb, z, tau);
      entry.max_likelihood = d.max_likelihood;
      entry.decided_known = d.known;
      entry.predicted = d.known ? d.class_id : -1;
      if (!d.known && update_on) {
        auto promo = buffer.absorb(z, out.final_skb, rec);
        if (promo) out.promoted.push_back(std::move(*promo));
      }
    }
    out.log.push_back(entry);
  }

  // Self-added entries map to the majority truth of their absorbed members
  // (ties toward the lowest label); the mapping is computed once, after the
  // stream ends.
  std::map<int, std::uint32_t> mapping;
  for (const auto& promo : out.promoted) {
    std::map<std::uint32_t, std::size_t> votes;
    for (std::uint64_t tag : promo.tags)
      ++votes[ds.records[static_cast<std::uint32_t>(tag)].label];
    std::uint32_t best_label = 0;
    std::size_t best_votes = 0;
    for (const auto& [label, v] : votes)
      if (v > best_votes) {
        best_votes = v;
        best_label = label;
      }
    mapping[promo.class_id] = best_label;
    out.cluster_truth_map.emplace_back(promo.class_id, best_label);
  }

  const std::set<int> trained_ids = [&] {
    std::set<int> s;
    for (const auto& e : skb0.entries()) s.insert(e.class_id);
    return s;
  }();

  for (auto& entry : out.log) {
    const bool truth_known = known_set.count(entry.truth) > 0;
    if (truth_known) {
      entry.correct = entry.decided_known &&
                      entry.predicted == static_cast<int>(entry.truth);
      ++out.n_known;
      out.known_accuracy += entry.correct;
    } else {
      if (!entry.decided_known) {
        entry.correct = true;
      } else if (update_on && !trained_ids.count(entry.predicted)) {
        const auto it = mapping.find(entry.predicted);
        entry.correct = it != mapping.end() && it->second == entry.truth;
      } else {
        entry.correct = false;
      }
      ++out.n_unknown;
      out.unknown_accuracy += entry.correct;
    }
    ++out.n;
    out.accuracy += entry.correct;
  }
  if (out.n > 0) out.accuracy /= static_cast<double>(out.n);
  if (out.n_known > 0)
    out.known_accuracy /= static_cast<double>(out.n_known);
  if (out.n_unknown > 0)
    out.unknown_accuracy /= static_cast<double>(out.n_unknown);

  if (!update_on && out.final_skb.to_bytes() != skb0_bytes)
    throw StateError("update-off evaluation must leave the SKB unchanged");
  return out;
}

namespace {

void append_rows(ResultTable& table, const std::string& method, double x,
                 const StreamOutcome& o, const std::string& hash) {
  table.rows.push_back({method, x, o.accuracy, o.n, hash});
  if (o.n_known > 0)
    table.rows.push_back(
        {method + ":known", x, o.known_accuracy, o.n_known, hash});
  if (o.n_unknown > 0)
    table.rows.push_back(
        {method + ":unknown", x, o.unknown_accuracy, o.n_unknown, hash});
}

void append_log(std::ostringstream& log, const std::string& sweep, double x,
                bool update_on, const StreamOutcome& o) {
  for (const auto& e : o.log) {
    log << sweep << ',' << format_double(x) << ','
        << (update_on ? "on" : "off") << ',' << e.record << ',' << e.truth
        << ',' << format_double(e.max_likelihood) << ','
        << (e.decided_known ? "known" : "unknown") << ',' << e.predicted
        << ',' << (e.correct ? 1 : 0) << '\n';
  }
}

nlohmann::json outcome_json(double x, bool update_on,
                            const StreamOutcome& o) {
  nlohmann::json j;
  j["x"] = x;
  j["update"] = update_on ? "on" : "off";
  j["accuracy"] = o.accuracy;
  j["known_accuracy"] = o.known_accuracy;
  j["unknown_accuracy"] = o.unknown_accuracy;
  j["n"] = o.n;
  j["n_known"] = o.n_known;
  j["n_unknown"] = o.n_unknown;
  j["self_added"] = nlohmann::json::array();
  for (const auto& [id, truth] : o.cluster_truth_map)
    j["self_added"].push_back({{"class_id", id}, {"mapped_truth", truth}});
  return j;
}

void sort_rows(ResultTable& table) {
  std::sort(table.rows.begin(), table.rows.end(),
            [](const ResultRow& a, const ResultRow& b) {
              return std::tie(a.method, a.x) < std::tie(b.method, b.x);
            });
}

}  // namespace

OpenEvalResult eval_open(const Dataset& ds, const EncoderDecoder& model,
                         const Skb& skb0, const OpenEvalSettings& settings) {
  const OpenSetProtocol& protocol = settings.protocol;
  protocol.validate();
  if (protocol.unknown_labels.empty())
    throw ConfigError("open-set evaluation needs at least one unknown class");

  // The SKB has to describe exactly the known world.
  std::set<std::uint32_t> skb_labels;
  for (const auto& e : skb0.entries())
    skb_labels.insert(static_cast<std::uint32_t>(e.class_id));
  if (skb_labels != std::set<std::uint32_t>(protocol.known_labels.begin(),
                                            protocol.known_labels.end()))
    throw ConfigError(
        "SKB classes do not match the protocol's known label set");
  const std::set<std::uint32_t> dataset_labels = [&] {
    const auto l = ds.labels();
    return std::set<std::uint32_t>(l.begin(), l.end());
  }();
  for (std::uint32_t u : protocol.unknown_labels)
    if (!dataset_labels.count(u))
      throw ConfigError("unknown label " + std::to_string(u) +
                        " does not occur in the dataset");

  const Splits splits =
      split_dataset(ds, settings.split, protocol.known_labels);

  // One threshold for the whole protocol, calibrated on known validation
  // features against the initial SKB.
  const std::vector<VectorXd> val_features =
      extract_features(model, ds, splits.val);
  const TauCalibration cal =
      calibrate_tau(val_features, skb0, protocol.tau_target);

  // Feature cache over every record the sweeps can touch.
  std::vector<VectorXd> cache(ds.records.size());
  {
    std::vector<std::uint32_t> wanted = splits.test;
    const std::set<std::uint32_t> unknown_set(protocol.unknown_labels.begin(),
                                              protocol.unknown_labels.end());
    for (std::size_t i = 0; i < ds.records.size(); ++i)
      if (unknown_set.count(ds.records[i].label))
        wanted.push_back(static_cast<std::uint32_t>(i));
    const std::vector<VectorXd> feats = extract_features(model, ds, wanted);
    for (std::size_t k = 0; k < wanted.size(); ++k)
      cache[wanted[k]] = feats[k];
  }

  const std::vector<float> levels = ds.snr_levels();
  const std::set<std::uint32_t> known_set(protocol.known_labels.begin(),
                                          protocol.known_labels.end());

  auto stream_for = [&](float snr, std::size_t unknown_count) {
    std::vector<std::uint32_t> stream;
    for (std::uint32_t i : splits.test)
      if (ds.records[i].snr_db == snr) stream.push_back(i);
    std::set<std::uint32_t> subset(
        protocol.unknown_labels.begin(),
        protocol.unknown_labels.begin() +
            static_cast<std::ptrdiff_t>(unknown_count));
    for (std::size_t i = 0; i < ds.records.size(); ++i)
      if (ds.records[i].snr_db == snr && subset.count(ds.records[i].label))
        stream.push_back(static_cast<std::uint32_t>(i));
    return stream;
  };

  OpenEvalResult result;
  result.snr_table.x_name = "snr_db";
  result.count_table.x_name = "unknown_count";
  std::ostringstream log;
  log << "sweep,x,update,record,truth,max_p,decision,predicted,correct\n";
  result.summary["tau"] = cal.tau;
  result.summary["achieved_acceptance"] = cal.achieved_acceptance;
  result.summary["order_seed"] = protocol.order_seed;
  result.summary["snr_sweep"] = nlohmann::json::array();
  result.summary["count_sweep"] = nlohmann::json::array();

  if (settings.run_snr_sweep) {
    for (std::size_t li = 0; li < levels.size(); ++li) {
      const auto stream = stream_for(levels[li], 1);
      const std::uint64_t seed =
          derive_seed(protocol.order_seed, Stream::kEvalOrder, {0, li});
      for (bool update_on : {false, true}) {
        const StreamOutcome o = run_open_stream(
            model, skb0, ds, stream, cache, cal.tau, update_on, protocol,
            seed);
        append_rows(result.snr_table,
                    update_on ? "skb-update-on" : "skb-update-off",
                    levels[li], o, settings.config_hash);
        append_log(log, "snr", levels[li], update_on, o);
        result.summary["snr_sweep"].push_back(
            outcome_json(levels[li], update_on, o));
      }
    }
  }

  std::vector<std::uint32_t> counts = settings.unknown_counts;
  if (counts.empty())
    for (std::uint32_t c = 1; c <= protocol.unknown_labels.size(); ++c)
      counts.push_back(c);
  const float top_snr = levels.back();
  for (std::uint32_t c : counts) {
    if (c < 1 || c > protocol.unknown_labels.size())
      throw ConfigError("unknown count " + std::to_string(c) +
                        " exceeds the unknown label pool");
    const auto stream = stream_for(top_snr, c);
    const std::uint64_t seed =
        derive_seed(protocol.order_seed, Stream::kEvalOrder, {1, c});
    for (bool update_on : {false, true}) {
      const StreamOutcome o = run_open_stream(model, skb0, ds, stream, cache,
                                              cal.tau, update_on, protocol,
                                              seed);
      append_rows(result.count_table,
                  update_on ? "skb-update-on" : "skb-update-off",
                  static_cast<double>(c), o, settings.config_hash);
      append_log(log, "count", static_cast<double>(c), update_on, o);
      result.summary["count_sweep"].push_back(
          outcome_json(static_cast<double>(c), update_on, o));
    }
  }

  sort_rows(result.snr_table);
  sort_rows(result.count_table);
  result.prediction_log = log.str();
  return result;
}

}  // namespace tsp
