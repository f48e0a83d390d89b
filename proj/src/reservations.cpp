#include "parksearch/reservations.hpp"

#include <algorithm>

namespace parksearch {

void ReservationTable::place(const Reservation& reservation) {
  cancel(reservation.agent);
  by_agent_.emplace(reservation.agent, reservation);
  by_resource_[reservation.resource].insert(reservation.agent);
}

bool ReservationTable::cancel(AgentId agent) {
  auto it = by_agent_.find(agent);
  if (it == by_agent_.end()) return false;
  auto res = by_resource_.find(it->second.resource);
  res->second.erase(agent);
  if (res->second.empty()) by_resource_.erase(res);
  by_agent_.erase(it);
  return true;
}

std::optional<Reservation> ReservationTable::of_agent(AgentId agent) const {
  auto it = by_agent_.find(agent);
  if (it == by_agent_.end()) return std::nullopt;
  return it->second;
}

std::vector<Reservation> ReservationTable::on_resource(ResourceIndex resource) const {
  std::vector<Reservation> out;
  auto it = by_resource_.find(resource);
  if (it == by_resource_.end()) return out;
  for (AgentId a : it->second) out.push_back(by_agent_.at(a));
  std::sort(out.begin(), out.end(), [](const Reservation& x, const Reservation& y) {
    return x.t_arrival != y.t_arrival ? x.t_arrival < y.t_arrival : x.agent < y.agent;
  });
  return out;
}

bool ReservationTable::reserved_before(ResourceIndex resource, AgentId querying_agent,
                                       double query_arrival) const {
  auto it = by_resource_.find(resource);
  if (it == by_resource_.end()) return false;
  for (AgentId holder : it->second) {
    if (holder == querying_agent) continue;
    const double t = by_agent_.at(holder).t_arrival;
    if (t < query_arrival || (t == query_arrival && holder < querying_agent)) return true;
  }
  return false;
}

bool ReservationTable::consistent() const {
  std::size_t indexed = 0;
  for (const auto& [resource, agents] : by_resource_) {
    if (agents.empty()) return false;
    for (AgentId a : agents) {
      auto it = by_agent_.find(a);
      if (it == by_agent_.end() || it->second.resource != resource) return false;
      ++indexed;
    }
  }
  return indexed == by_agent_.size();
}

void place_reservation(ReservationTable& table, AgentId agent, ResourceIndex resource,
                       double t_arrival) {
  table.place(Reservation{resource, agent, t_arrival});
}

bool effective_availability(const ReservationTable& table, ResourceIndex resource,
                            AgentId querying_agent, double query_arrival,
                            bool currently_available) {
  if (!currently_available) return false;
  return !table.reserved_before(resource, querying_agent, query_arrival);
}

}  // namespace parksearch
