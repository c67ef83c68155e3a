#include "tsp/skb.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "tsp/binio.hpp"
#include "tsp/error.hpp"

namespace tsp {

Skb::Skb(int dim) : dim_(dim) {
  if (dim < 2) throw ConfigError("SKB dimension must be at least 2");
}

void Skb::add_entry(SkbEntry entry) {
  if (entry.center.size() != dim_ || entry.var.size() != dim_)
    throw StateError("SKB entry dimension mismatch");
  if (entry.support < 1)
    throw StateError("SKB entry needs support >= 1");
  for (Eigen::Index i = 0; i < entry.var.size(); ++i)
    if (!(entry.var[i] > 0))
      throw StateError("SKB entry variance must be positive");
  for (const auto& e : entries_)
    if (e.class_id == entry.class_id)
      throw StateError("duplicate SKB class id " +
                       std::to_string(entry.class_id));
  entries_.push_back(std::move(entry));
}

int Skb::next_class_id() const {
  int next = 0;
  for (const auto& e : entries_) next = std::max(next, e.class_id + 1);
  return next;
}

const SkbEntry& Skb::entry_for(int class_id) const {
  for (const auto& e : entries_)
    if (e.class_id == class_id) return e;
  throw StateError("SKB has no class " + std::to_string(class_id));
}

Skb build_skb(const std::vector<VectorXd>& features,
              const std::vector<std::uint32_t>& labels, double var_floor) {
  if (features.empty()) throw ConfigError("cannot build SKB from no features");
  if (features.size() != labels.size())
    throw StateError("feature/label count mismatch");
  const auto dim = features.front().size();

  std::map<std::uint32_t, std::vector<const VectorXd*>> by_class;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != dim)
      throw StateError("inconsistent feature dimensions");
    by_class[labels[i]].push_back(&features[i]);
  }

  Skb skb(static_cast<int>(dim));
  for (const auto& [label, members] : by_class) {
    const auto n = members.size();
    if (n < 2)
      throw ConfigError("class " + std::to_string(label) +
                        " has insufficient support (" + std::to_string(n) +
                        " samples, need at least 2) for SKB construction");
    VectorXd mean = VectorXd::Zero(dim);
    for (const auto* f : members) mean += *f;
    mean /= static_cast<double>(n);
    VectorXd var = VectorXd::Zero(dim);
    for (const auto* f : members) var += (*f - mean).array().square().matrix();
    var /= static_cast<double>(n - 1);
    var = var.cwiseMax(var_floor);

    SkbEntry e;
    e.class_id = static_cast<int>(label);
    e.provenance = SkbEntry::Provenance::kTrained;
    e.support = static_cast<std::uint32_t>(n);
    e.center = std::move(mean);
    e.var = std::move(var);
    skb.add_entry(std::move(e));
  }
  return skb;
}

double cosine_similarity(const VectorXd& a, const VectorXd& b) {
  if (a.size() != b.size())
    throw StateError("cosine similarity: dimension mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0)
    throw NumericError("degenerate feature: zero vector in cosine similarity");
  return a.dot(b) / (na * nb);
}

int match_class(const Skb& skb, const VectorXd& z) {
  if (skb.empty()) throw StateError("cannot match against an empty SKB");
  int best_id = 0;
  double best_sim = 0.0;
  bool first = true;
  for (const auto& e : skb.entries()) {
    const double sim = cosine_similarity(z, e.center);
    if (first || sim > best_sim ||
        (sim == best_sim && e.class_id < best_id)) {
      best_sim = sim;
      best_id = e.class_id;
      first = false;
    }
  }
  return best_id;
}

double class_likelihood(const VectorXd& z, const SkbEntry& entry) {
  if (z.size() != entry.center.size())
    throw StateError("likelihood: dimension mismatch");
  double inside = 1.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double sigma = std::sqrt(entry.var[i]);
    const double delta = std::abs(z[i] - entry.center[i]);
    inside *= std::erf(delta / (sigma * std::sqrt(2.0)));
  }
  return 1.0 - inside;
}

Detection detect(const Skb& skb, const VectorXd& z, double tau) {
  if (skb.empty()) throw StateError("cannot detect against an empty SKB");
  Detection d;
  d.max_likelihood = 0.0;
  for (const auto& e : skb.entries())
    d.max_likelihood = std::max(d.max_likelihood, class_likelihood(z, e));
  d.known = d.max_likelihood >= tau;
  if (d.known) d.class_id = match_class(skb, z);
  return d;
}

TauCalibration calibrate_tau(const std::vector<VectorXd>& known_features,
                             const Skb& skb, double target_acceptance) {
  if (known_features.empty())
    throw ConfigError("tau calibration needs at least one known feature");
  if (!(target_acceptance > 0.0) || !(target_acceptance < 1.0))
    throw ConfigError("target acceptance must lie in (0, 1)");

  std::vector<double> scores;
  scores.reserve(known_features.size());
  for (const auto& z : known_features) {
    double best = 0.0;
    for (const auto& e : skb.entries())
      best = std::max(best, class_likelihood(z, e));
    scores.push_back(best);
  }
  std::sort(scores.begin(), scores.end());

  const auto n = scores.size();
  const auto want =
      static_cast<std::size_t>(std::ceil(target_acceptance * n));
  const std::size_t k = n - std::min(n, want);
  TauCalibration cal;
  cal.tau = scores[k];
  std::size_t passing = 0;
  for (double s : scores) passing += (s >= cal.tau);
  cal.achieved_acceptance = static_cast<double>(passing) / n;
  return cal;
}

UnknownBuffer::UnknownBuffer(double assign_radius, std::uint32_t maturity)
    : assign_radius_(assign_radius), maturity_(maturity) {
  if (!(assign_radius > 0)) throw ConfigError("assign radius must be positive");
  if (maturity < 2) throw ConfigError("cluster maturity must be at least 2");
}

std::optional<PromotedCluster> UnknownBuffer::absorb(const VectorXd& z,
                                                     Skb& skb,
                                                     std::uint64_t tag,
                                                     double var_floor) {
  // Nearest provisional cluster by cosine distance to its running mean.
  std::size_t best = clusters_.size();
  double best_dist = assign_radius_;
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    const VectorXd mean = clusters_[c].mean();
    if (mean.norm() == 0.0) continue;
    const double dist = 1.0 - cosine_similarity(z, mean);
    if (dist <= best_dist) {
      best_dist = dist;
      best = c;
    }
  }

  if (best == clusters_.size()) {
    Cluster fresh;
    fresh.sum = z;
    fresh.members.push_back(z);
    fresh.tags.push_back(tag);
    clusters_.push_back(std::move(fresh));
    best = clusters_.size() - 1;
  } else {
    clusters_[best].sum += z;
    clusters_[best].members.push_back(z);
    clusters_[best].tags.push_back(tag);
  }

  if (clusters_[best].members.size() < maturity_) return std::nullopt;

  // Promotion: the exact arithmetic mean of the members becomes a new entry.
  Cluster done = std::move(clusters_[best]);
  clusters_.erase(clusters_.begin() + static_cast<std::ptrdiff_t>(best));

  const auto n = done.members.size();
  VectorXd center = done.sum / static_cast<double>(n);
  VectorXd var = VectorXd::Zero(center.size());
  for (const auto& m : done.members)
    var += (m - center).array().square().matrix();
  var /= static_cast<double>(n - 1);
  var = var.cwiseMax(var_floor);

  SkbEntry e;
  e.class_id = skb.next_class_id();
  e.provenance = SkbEntry::Provenance::kSelfAdded;
  e.support = static_cast<std::uint32_t>(n);
  e.center = std::move(center);
  e.var = std::move(var);
  const int new_id = e.class_id;
  skb.add_entry(std::move(e));

  return PromotedCluster{new_id, std::move(done.members),
                         std::move(done.tags)};
}

static const char kSkbMagic[4] = {'T', 'S', 'P', 'K'};
static constexpr std::uint16_t kSkbVersion = 1;

std::vector<char> Skb::to_bytes() const {
  BinWriter w;
  w.put_magic(kSkbMagic);
  w.put<std::uint16_t>(kSkbVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dim_));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(entries_.size()));
  for (const auto& e : entries_) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(e.class_id));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(e.provenance));
    w.put<std::uint32_t>(e.support);
    for (Eigen::Index i = 0; i < dim_; ++i) w.put<double>(e.center[i]);
    for (Eigen::Index i = 0; i < dim_; ++i) w.put<double>(e.var[i]);
  }
  return w.bytes();
}

Skb Skb::from_bytes(const std::vector<char>& bytes, const std::string& name) {
  BinReader r(bytes, name);
  r.expect_magic(kSkbMagic);
  const auto version = r.get<std::uint16_t>();
  if (version != kSkbVersion)
    throw FormatError(name + ": unsupported SKB version " +
                      std::to_string(version) + " at byte offset 4");
  const auto dim = r.get<std::uint32_t>();
  const auto count = r.get<std::uint32_t>();
  Skb skb(static_cast<int>(dim));
  for (std::uint32_t k = 0; k < count; ++k) {
    SkbEntry e;
    e.class_id = static_cast<int>(r.get<std::uint32_t>());
    const auto prov = r.get<std::uint8_t>();
    if (prov > 1)
      throw FormatError(name + ": bad provenance flag at byte offset " +
                        std::to_string(r.offset() - 1));
    e.provenance = static_cast<SkbEntry::Provenance>(prov);
    e.support = r.get<std::uint32_t>();
    e.center.resize(dim);
    e.var.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i) e.center[i] = r.get<double>();
    for (std::uint32_t i = 0; i < dim; ++i) e.var[i] = r.get<double>();
    skb.add_entry(std::move(e));
  }
  r.expect_end();
  return skb;
}

void Skb::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_bytes());
}

Skb Skb::load(const std::filesystem::path& path) {
  return from_bytes(read_file(path), path.string());
}

std::string Skb::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries_) {
    nlohmann::json je;
    je["class_id"] = e.class_id;
    je["provenance"] = e.provenance == SkbEntry::Provenance::kTrained
                           ? "trained"
                           : "self_added";
    je["support"] = e.support;
    je["center"] = std::vector<double>(e.center.data(),
                                       e.center.data() + e.center.size());
    je["var"] =
        std::vector<double>(e.var.data(), e.var.data() + e.var.size());
    j["entries"].push_back(je);
  }
  return j.dump(2) + "\n";
}

}  // namespace tsp
