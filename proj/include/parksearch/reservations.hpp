#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "parksearch/ids.hpp"

namespace parksearch {

/// A fleet agent's announced intention to claim `resource` at `t_arrival`.
struct Reservation {
  ResourceIndex resource;
  AgentId agent;
  double t_arrival = 0.0;

  bool operator==(const Reservation&) const = default;
};

/// Active reservations, at most one per agent, indexed both ways.
class ReservationTable {
 public:
  /// Replaces the agent's previous reservation, if any.
  void place(const Reservation& reservation);
  /// Removes the agent's reservation; returns whether one existed.
  bool cancel(AgentId agent);

  std::optional<Reservation> of_agent(AgentId agent) const;
  /// Reservations on `resource`, ordered by (t_arrival, agent).
  std::vector<Reservation> on_resource(ResourceIndex resource) const;

  /// True when another agent's reservation on `resource` takes precedence
  /// over `querying_agent` arriving at `query_arrival`: it arrives strictly
  /// earlier, or at the same time with a smaller agent id (the engine
  /// resolves simultaneous claims in agent id order).
  bool reserved_before(ResourceIndex resource, AgentId querying_agent, double query_arrival) const;

  std::size_t size() const { return by_agent_.size(); }
  bool empty() const { return by_agent_.empty(); }

  /// Index consistency: every agent entry appears exactly once in the
  /// resource index and vice versa.
  bool consistent() const;

  bool operator==(const ReservationTable&) const = default;

 private:
  std::map<AgentId, Reservation> by_agent_;
  std::map<ResourceIndex, std::set<AgentId>> by_resource_;
};

/// Places `agent`'s reservation; its previous one is dropped.
void place_reservation(ReservationTable& table, AgentId agent, ResourceIndex resource,
                       double t_arrival);

/// Whether `resource` can be counted on by `querying_agent` arriving at
/// `query_arrival`: it must be available now and no other agent may hold a
/// reservation that takes precedence.
bool effective_availability(const ReservationTable& table, ResourceIndex resource,
                            AgentId querying_agent, double query_arrival, bool currently_available);

}  // namespace parksearch
