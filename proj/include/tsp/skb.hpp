#ifndef TSP_SKB_HPP
#define TSP_SKB_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tsp/params.hpp"

namespace tsp {

// Keeps per-class Gaussians well-defined even for degenerate (identical)
// feature clusters.
inline constexpr double kVarFloor = 1e-6;

// One class prototype: a center feature and a diagonal variance, both
// estimated from samples. provenance records whether the entry came from
// initial construction or was self-added at inference time.
struct SkbEntry {
  enum class Provenance : std::uint8_t { kTrained = 0, kSelfAdded = 1 };

  int class_id = 0;
  Provenance provenance = Provenance::kTrained;
  std::uint32_t support = 0;
  VectorXd center;
  VectorXd var;
};

// Ordered set of class prototypes sharing one latent dimension. Queries are
// read-only; growth happens only through add_entry (single writer).
class Skb {
 public:
  explicit Skb(int dim);

  void add_entry(SkbEntry entry);
  const std::vector<SkbEntry>& entries() const { return entries_; }
  int dim() const { return dim_; }
  bool empty() const { return entries_.empty(); }
  int next_class_id() const;
  const SkbEntry& entry_for(int class_id) const;

  // TSPK file: magic "TSPK", u16 version=1, u32 dim, u32 entry count, then
  // per entry: u32 class_id, u8 provenance, u32 support, dim x f64 center,
  // dim x f64 var.
  std::vector<char> to_bytes() const;
  static Skb from_bytes(const std::vector<char>& bytes,
                        const std::string& name);
  void save(const std::filesystem::path& path) const;
  static Skb load(const std::filesystem::path& path);

  // Human-readable mirror of the binary file.
  std::string to_json() const;

 private:
  int dim_;
  std::vector<SkbEntry> entries_;
};

// Per-class mean and unbiased per-dimension variance (floored) over labeled
// features; every class needs at least two samples.
Skb build_skb(const std::vector<VectorXd>& features,
              const std::vector<std::uint32_t>& labels,
              double var_floor = kVarFloor);

// Cosine of the angle between two non-zero vectors.
double cosine_similarity(const VectorXd& a, const VectorXd& b);

// Class of the entry with maximal cosine similarity; ties break toward the
// lowest class_id.
int match_class(const Skb& skb, const VectorXd& z);

// Probability mass of the entry's Gaussian OUTSIDE the axis-aligned box
// reaching from the center to z in every dimension:
//   P(z) = 1 - prod_i erf(|z_i - center_i| / (sigma_i * sqrt(2)))
// Equals 1 at the center and decays as z moves away in all dimensions.
double class_likelihood(const VectorXd& z, const SkbEntry& entry);

struct Detection {
  bool known = false;
  int class_id = -1;      // valid when known
  double max_likelihood = 0.0;
};

// Known iff some entry's likelihood reaches tau; the reported class always
// comes from cosine matching over the whole SKB.
Detection detect(const Skb& skb, const VectorXd& z, double tau);

struct TauCalibration {
  double tau = 0.0;
  double achieved_acceptance = 0.0;
};

// Threshold such that at least target_acceptance of the given known features
// pass detect() as known: the (1 - target) quantile of max-likelihoods.
TauCalibration calibrate_tau(const std::vector<VectorXd>& known_features,
                             const Skb& skb, double target_acceptance);

struct PromotedCluster {
  int class_id = 0;
  std::vector<VectorXd> members;
  std::vector<std::uint64_t> tags;  // caller-supplied member identifiers
};

// Provisional clusters of features flagged unknown. A feature joins the
// nearest cluster whose running mean lies within the cosine-distance radius,
// or founds a new cluster. A cluster reaching `maturity` members is promoted
// into the SKB as a self-added entry (center = exact arithmetic mean, var =
// member sample variance, floored) and leaves the buffer.
class UnknownBuffer {
 public:
  UnknownBuffer(double assign_radius, std::uint32_t maturity);

  // tag travels with the feature and comes back in the promotion record
  // (callers use it to audit cluster membership).
  std::optional<PromotedCluster> absorb(const VectorXd& z, Skb& skb,
                                        std::uint64_t tag = 0,
                                        double var_floor = kVarFloor);

  struct Cluster {
    VectorXd sum;
    std::vector<VectorXd> members;
    std::vector<std::uint64_t> tags;
    VectorXd mean() const {
      return sum / static_cast<double>(members.size());
    }
  };
  const std::vector<Cluster>& clusters() const { return clusters_; }

 private:
  double assign_radius_;
  std::uint32_t maturity_;
  std::vector<Cluster> clusters_;
};

}  // namespace tsp

#endif  // TSP_SKB_HPP
