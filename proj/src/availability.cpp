#include "parksearch/availability.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "parksearch/errors.hpp"

namespace parksearch {

const char* to_string(ResourceState s) {
  return s == ResourceState::available ? "available" : "occupied";
}

ResourceState resource_state_from_string(std::string_view text) {
  if (text == "available") return ResourceState::available;
  if (text == "occupied") return ResourceState::occupied;
  throw ParseError("unknown resource state '" + std::string(text) + "'");
}

CtmcParams CtmcParams::from_mean_sojourns(double available_s, double occupied_s) {
  if (!(available_s > 0.0) || !(occupied_s > 0.0)) {
    throw ConfigError("mean sojourn times must be positive");
  }
  return CtmcParams{1.0 / available_s, 1.0 / occupied_s};
}

double transition_probability(const CtmcParams& params, ResourceState from, ResourceState to,
                              double dt) {
  assert(dt >= 0.0);
  const double total = params.lambda + params.mu;
  const double decay = std::exp(-total * dt);
  const double stationary = params.mu / total;
  double to_available = 0.0;
  if (from == ResourceState::available) {
    // written as 1 - ... so dt = 0 gives exactly 1
    to_available = 1.0 - (params.lambda / total) * (1.0 - decay);
  } else {
    to_available = stationary * (1.0 - decay);
  }
  return to == ResourceState::available ? to_available : 1.0 - to_available;
}

std::uint64_t AdaptionOverlay::open_record() {
  const std::uint64_t id = next_record_++;
  records_.insert(id);
  return id;
}

void AdaptionOverlay::add(ResourceIndex resource, const Entry& entry) {
  assert(records_.contains(entry.record));
  by_resource_[resource].push_back(entry);
}

std::size_t AdaptionOverlay::remove_record(std::uint64_t record) {
  records_.erase(record);
  std::size_t removed = 0;
  for (auto it = by_resource_.begin(); it != by_resource_.end();) {
    auto& list = it->second;
    const auto before = list.size();
    std::erase_if(list, [record](const Entry& e) { return e.record == record; });
    removed += before - list.size();
    if (list.empty()) {
      it = by_resource_.erase(it);
    } else {
      ++it;
    }
  }
  return removed;
}

double AdaptionOverlay::active_delta(ResourceIndex resource, double at,
                                     std::optional<AgentId> exclude_owner) const {
  auto it = by_resource_.find(resource);
  if (it == by_resource_.end()) return 0.0;
  double sum = 0.0;
  for (const Entry& e : it->second) {
    if (e.activation_time <= at && e.owner != exclude_owner) sum += e.delta;
  }
  return sum;
}

const std::vector<AdaptionOverlay::Entry>* AdaptionOverlay::entries(ResourceIndex resource) const {
  auto it = by_resource_.find(resource);
  return it == by_resource_.end() ? nullptr : &it->second;
}

std::size_t AdaptionOverlay::size() const {
  std::size_t n = 0;
  for (const auto& [_, list] : by_resource_) n += list.size();
  return n;
}

double availability_probability(const ResourceBelief& belief, double at) {
  return transition_probability(belief.params, belief.state_at_anchor, ResourceState::available,
                                std::max(0.0, at - belief.anchor_time));
}

double availability_probability(const ResourceBelief& belief, double at,
                                const AdaptionOverlay* overlay, ResourceIndex resource,
                                std::optional<AgentId> exclude_owner) {
  double p = availability_probability(belief, at);
  if (overlay != nullptr) p -= overlay->active_delta(resource, at, exclude_owner);
  return std::clamp(p, 0.0, 1.0);
}

double expected_wait_time(const CtmcParams& params, double round_trip_s) {
  assert(round_trip_s > 0.0);
  const double success =
      transition_probability(params, ResourceState::occupied, ResourceState::available, round_trip_s);
  return round_trip_s / success;
}

ResourceState sample_future_state(const ResourceBelief& belief, double at, Rng& rng) {
  return bernoulli(rng, availability_probability(belief, at)) ? ResourceState::available
                                                              : ResourceState::occupied;
}

double sample_sojourn(const CtmcParams& params, ResourceState state, Rng& rng) {
  return exponential(rng, state == ResourceState::available ? params.lambda : params.mu);
}

}  // namespace parksearch
