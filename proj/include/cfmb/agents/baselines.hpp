#pragma once

#include <memory>
#include <string>

#include "cfmb/engine.hpp"

namespace cfmb::agents {

/// P-PF scheduler: pending requesters over (1 + past satisfied slots).
class PpfScheduler final : public SchedulerPolicy {
 public:
  std::string name() const override { return "ppf"; }
  Schedule decide(const EpisodeState& state) override;
  std::unique_ptr<SchedulerPolicy> clone() const override { return std::make_unique<PpfScheduler>(*this); }
};

/// Each AP serves the UAV whose current tile has most pending requesters in its window.
class CbAssociation final : public AssociationPolicy {
 public:
  std::string name() const override { return "cb"; }
  VirtualCellMap decide(const EpisodeState& state) override;
  std::unique_ptr<AssociationPolicy> clone() const override { return std::make_unique<CbAssociation>(*this); }
};

/// All APs serve the UAV whose current tile has the highest P-PF priority.
class CfAssociation final : public AssociationPolicy {
 public:
  std::string name() const override { return "cf"; }
  VirtualCellMap decide(const EpisodeState& state) override;
  std::unique_ptr<AssociationPolicy> clone() const override { return std::make_unique<CfAssociation>(*this); }
};

std::unique_ptr<SchedulerPolicy> make_baseline_scheduler(const std::string& name);
std::unique_ptr<AssociationPolicy> make_baseline_association(const std::string& name);

}  // namespace cfmb::agents
