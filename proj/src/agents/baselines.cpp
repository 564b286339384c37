#include "cfmb/agents/baselines.hpp"

#include <stdexcept>

#include "cfmb/errors.hpp"

namespace cfmb::agents {

Schedule PpfScheduler::decide(const EpisodeState& state) {
  if (!state.at_reschedule_boundary()) throw StateError("scheduler invoked off a re-scheduling boundary");
  return ppf_schedule(state.decode, state.history, state.config->time.slots_per_reschedule);
}

VirtualCellMap CbAssociation::decide(const EpisodeState& state) {
  const auto tiles = state.current_tiles();
  std::vector<std::size_t> choice(state.n_aps());
  for (std::size_t b = 0; b < state.n_aps(); ++b)
    choice[b] = cb_decide(b, state.deployment, state.decode, tiles, state.config->engine.observation_window);
  return form_virtual_cells(choice, state.n_uavs());
}

VirtualCellMap CfAssociation::decide(const EpisodeState& state) {
  const auto tiles = state.current_tiles();
  std::vector<double> prio;
  prio.reserve(tiles.size());
  for (const auto& t : tiles) prio.push_back(ppf_priority(t, state.decode, state.history));
  return cf_decide(prio, state.n_aps());
}

std::unique_ptr<SchedulerPolicy> make_baseline_scheduler(const std::string& name) {
  if (name == "ppf") return std::make_unique<PpfScheduler>();
  throw ConfigError("scheduler: unknown name '" + name + "' (options: ppf)");
}

std::unique_ptr<AssociationPolicy> make_baseline_association(const std::string& name) {
  if (name == "cb") return std::make_unique<CbAssociation>();
  if (name == "cf") return std::make_unique<CfAssociation>();
  throw ConfigError("association: unknown name '" + name + "' (options: cb, cf)");
}

}  // namespace cfmb::agents
