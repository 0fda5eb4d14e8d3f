#include "grouptrack/synth.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <random>
#include <stdexcept>

namespace grouptrack {

namespace {

constexpr std::array<std::string_view, 5> names{"walk-together", "split-after-N", "merge-at-N", "stop-near-equipment",
                                                "fig4"};

constexpr double fps = 10.0;
constexpr double walk = 1.2;
constexpr double link = 0.95;
const Vec3 person{0.5, 0.5, 1.7};
const Vec3 blob{1.2, 1.2, 1.7};

class Builder {
 public:
  Builder(std::uint64_t seed, double noise) : rng_(seed), noise_(0.0, noise), sigma_(noise) {}

  void add(FrameId f, MobileId id, Vec2 p, Vec3 size, std::vector<FatherLink> fathers = {}) {
    if (sigma_ > 0) {
      p.x += noise_(rng_);
      p.y += noise_(rng_);
    }
    auto& seen = last_seen_;
    if (fathers.empty())
      if (auto it = seen.find(id); it != seen.end() && it->second == f - 1) fathers.push_back({id, link, f - 1});
    for (auto& fa : fathers)
      if (fa.frame < 0) fa.frame = seen.count(fa.id) ? seen[fa.id] : -1;
    frames_[f].push_back({id, f, {p.x, p.y, 0.0}, size, ObjectClass::Unclassified, std::move(fathers)});
    seen[id] = f;
  }

  void gt(FrameId f, std::int64_t gid, std::set<MobileId> members) { gt_[gid].members[f] = std::move(members); }

  SynthOutput finish(SceneContext ctx) {
    SynthOutput out;
    for (auto& [f, ms] : frames_) {
      std::sort(ms.begin(), ms.end(), [](const Mobile& a, const Mobile& b) { return a.id < b.id; });
      out.detections.frames.push_back({f, std::move(ms)});
    }
    for (auto& [id, g] : gt_) {
      g.gt_id = id;
      out.ground_truth.push_back(std::move(g));
    }
    out.context = std::move(ctx);
    return out;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_;
  double sigma_;
  std::map<FrameId, std::vector<Mobile>> frames_;
  std::map<MobileId, FrameId> last_seen_;
  std::map<std::int64_t, GroundTruthGroup> gt_;
};

SceneContext base_context() {
  SceneContext ctx;
  ctx.ground_bounds = {{0.0, 0.0}, {80.0, 40.0}};
  ctx.frame_rate = fps;
  return ctx;
}

double secs(FrameId f) { return static_cast<double>(f) / fps; }

SynthOutput walk_together(const SynthParams& p, FrameId frames) {
  Builder b(p.seed, p.noise);
  std::set<MobileId> all;
  for (int a = 0; a < p.agents; ++a) all.insert(a + 1);
  for (FrameId f = 0; f < frames; ++f) {
    for (int a = 0; a < p.agents; ++a) b.add(f, a + 1, {10.0 + walk * secs(f), 20.0 + 0.5 * a}, person);
    b.gt(f, 1, all);
  }
  return b.finish(base_context());
}

SynthOutput split_after(const SynthParams& p, FrameId frames) {
  Builder b(p.seed, p.noise);
  for (FrameId f = 0; f < frames; ++f) {
    const double x = walk * secs(f);
    b.add(f, 1, {10.5 + x, 20.0}, person);
    b.add(f, 2, {10.5 + x, 20.5}, person);
    // the rear pair turns towards +y at frame n
    const double xb = walk * secs(std::min(f, p.n));
    const double yb = f > p.n ? walk * secs(f - p.n) : 0.0;
    b.add(f, 3, {10.0 + xb, 20.0 + yb}, person);
    b.add(f, 4, {10.0 + xb, 20.5 + yb}, person);
    if (f < p.n) {
      b.gt(f, 1, {1, 2, 3, 4});
    } else {
      b.gt(f, 1, {1, 2});
      b.gt(f, 2, {3, 4});
    }
  }
  return b.finish(base_context());
}

SynthOutput merge_at(const SynthParams& p, FrameId frames) {
  Builder b(p.seed, p.noise);
  const double meet = 20.0 + secs(p.n);
  const FrameId second = 10;
  for (FrameId f = 0; f < frames; ++f) {
    if (f <= p.n) {
      b.add(f, 1, {20.0 + secs(f), 20.0}, blob);
      b.gt(f, 1, {1});
      if (f >= second) {
        b.add(f, 2, {meet + secs(p.n - f), 20.0}, blob);
        b.gt(f, 2, {2});
      }
    } else {
      std::vector<FatherLink> fathers;
      if (f == p.n + 1) fathers = {{1, 0.9, p.n}, {2, 0.9, p.n}};
      b.add(f, 3, {meet, 20.0}, {2.0, 2.0, 1.7}, std::move(fathers));
      b.gt(f, 1, {3});
    }
  }
  return b.finish(base_context());
}

SynthOutput stop_near(const SynthParams& p, FrameId frames) {
  Builder b(p.seed, p.noise);
  const FrameId arrive = 100, leave = 140;
  for (FrameId f = 0; f < frames; ++f) {
    double x = 28.0;
    if (f <= arrive) x += walk * secs(f);
    else if (f < leave) x += walk * secs(arrive);
    else x += walk * secs(arrive + f - leave + 1);
    b.add(f, 1, {x, 20.0}, person);
    b.add(f, 2, {x, 20.5}, person);
    b.gt(f, 1, {1, 2});
  }
  auto ctx = base_context();
  ctx.equipment.push_back({p.equipment_name, {40.0, 21.45}});
  ctx.zones.push_back({"shop", {{36.0, 22.0}, {44.0, 22.0}, {44.0, 30.0}, {36.0, 30.0}}});
  return b.finish(std::move(ctx));
}

SynthOutput fig4(const SynthParams& p, FrameId frames) {
  Builder b(p.seed, p.noise);
  const FrameId half = frames / 2;
  for (FrameId f = 0; f < frames; ++f) {
    b.add(f, 1, {10.0 + walk * secs(f), 10.0}, person);
    b.add(f, 2, {10.0 + walk * secs(f), 10.5}, person);
    b.add(f, 3, {60.0 - walk * secs(f), 30.0}, person);
    // two walkers on the same path, one after the other
    if (f < half - 20) b.add(f, 4, {10.0 + walk * secs(f), 20.0}, person);
    if (f >= half) b.add(f, 5, {10.0 + walk * secs(f - half), 20.0}, person);
    b.gt(f, 1, {1, 2});
  }
  return b.finish(base_context());
}

}  // namespace

std::string_view to_string(SynthScenario s) { return names[static_cast<std::size_t>(s)]; }

std::optional<SynthScenario> synth_scenario_from_string(std::string_view s) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == s) return static_cast<SynthScenario>(i);
  return std::nullopt;
}

void SynthParams::validate() const {
  if (frames < 0) throw std::invalid_argument("frames must be non-negative");
  if (agents < 1 || agents > 20) throw std::invalid_argument("agents must be in [1,20]");
  if (noise < 0) throw std::invalid_argument("noise must be non-negative");
  if (scenario == SynthScenario::MergeAtN && (n < 12 || n > 300)) throw std::invalid_argument("merge frame must be in [12,300]");
  if (scenario == SynthScenario::SplitAfterN && (n < 1 || n > 300)) throw std::invalid_argument("split frame must be in [1,300]");
  if (scenario == SynthScenario::StopNearEquipment && equipment_name.empty())
    throw std::invalid_argument("equipment name must not be empty");
}

SynthOutput synthesize(const SynthParams& p) {
  p.validate();
  auto len = [&](FrameId def) { return p.frames > 0 ? p.frames : def; };
  switch (p.scenario) {
    case SynthScenario::WalkTogether: return walk_together(p, len(200));
    case SynthScenario::SplitAfterN: return split_after(p, len(p.n + 140));
    case SynthScenario::MergeAtN: return merge_at(p, len(p.n + 80));
    case SynthScenario::StopNearEquipment: return stop_near(p, len(200));
    case SynthScenario::Fig4: return fig4(p, len(200));
  }
  throw std::invalid_argument("unknown scenario");
}

}  // namespace grouptrack
