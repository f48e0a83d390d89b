#pragma once

// Two-state continuous-time Markov chain availability model for resources,
// plus the overlay through which fleet coordination lowers predicted
// availability after a given time.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "parksearch/ids.hpp"
#include "parksearch/rng.hpp"

namespace parksearch {

enum class ResourceState : std::uint8_t { available, occupied };

constexpr ResourceState flipped(ResourceState s) {
  return s == ResourceState::available ? ResourceState::occupied : ResourceState::available;
}

const char* to_string(ResourceState s);
ResourceState resource_state_from_string(std::string_view text);

/// Rates of the two-state chain. `lambda` leaves `available`, `mu` leaves
/// `occupied`; both in 1/seconds.
struct CtmcParams {
  double lambda = 1.0 / 120.0;
  double mu = 1.0 / 2091.0;

  static CtmcParams from_mean_sojourns(double available_s, double occupied_s);

  /// Long-run fraction of time spent available, mu / (lambda + mu).
  double stationary_availability() const { return mu / (lambda + mu); }

  bool operator==(const CtmcParams&) const = default;
};

/// Entry (from, to) of the transition matrix P(dt) = exp(Q dt).
double transition_probability(const CtmcParams& params, ResourceState from, ResourceState to,
                              double dt);

/// Last real-time observation of a resource.
struct ResourceBelief {
  ResourceState state_at_anchor = ResourceState::available;
  double anchor_time = 0.0;
  CtmcParams params;
};

/// Per-resource list of probability subtractions that take effect at their
/// activation time. Entries are only ever appended or removed by record, so
/// removing a record restores the previous entry sequence exactly.
class AdaptionOverlay {
 public:
  struct Entry {
    double activation_time = 0.0;
    double delta = 0.0;
    AgentId owner;
    std::uint64_t record = 0;

    bool operator==(const Entry&) const = default;
  };

  /// Hands out a fresh record id and registers it as applied.
  std::uint64_t open_record();
  bool has_record(std::uint64_t record) const { return records_.contains(record); }

  /// Appends an entry; its record must be open.
  void add(ResourceIndex resource, const Entry& entry);

  /// Removes every entry tagged with `record` and closes it; returns how
  /// many entries were removed.
  std::size_t remove_record(std::uint64_t record);

  /// Sum of deltas active at `at` for the resource, skipping entries owned
  /// by `exclude_owner`.
  double active_delta(ResourceIndex resource, double at,
                      std::optional<AgentId> exclude_owner = std::nullopt) const;

  const std::vector<Entry>* entries(ResourceIndex resource) const;
  bool empty() const { return by_resource_.empty(); }
  std::size_t size() const;

  /// Compares entries and open records; the id counter is not state.
  bool operator==(const AdaptionOverlay& other) const {
    return by_resource_ == other.by_resource_ && records_ == other.records_;
  }

 private:
  std::map<ResourceIndex, std::vector<Entry>> by_resource_;
  std::set<std::uint64_t> records_;
  std::uint64_t next_record_ = 1;
};

/// CTMC prediction from the belief's anchor, without adaptions.
double availability_probability(const ResourceBelief& belief, double at);

/// CTMC prediction minus active overlay deltas for `resource`, clamped to
/// [0, 1]. A null overlay means no adaptions.
double availability_probability(const ResourceBelief& belief, double at,
                                const AdaptionOverlay* overlay, ResourceIndex resource,
                                std::optional<AgentId> exclude_owner = std::nullopt);

/// Expected time to claim a currently occupied resource by circling the
/// block: each round trip of length `round_trip_s` succeeds independently
/// with probability T_{o,a}(round_trip_s), so the wait is geometric.
double expected_wait_time(const CtmcParams& params, double round_trip_s);

/// Bernoulli draw of the state at `at` from the CTMC prediction.
ResourceState sample_future_state(const ResourceBelief& belief, double at, Rng& rng);

/// Exponential sojourn in `state`.
double sample_sojourn(const CtmcParams& params, ResourceState state, Rng& rng);

}  // namespace parksearch
