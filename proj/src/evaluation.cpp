#include "grouptrack/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace grouptrack {

void MatchConfig::validate() const {
  if (!(jaccard_threshold > 0 && jaccard_threshold <= 1)) throw std::invalid_argument("jaccard threshold must be in (0,1]");
  if (first_frame && last_frame && *first_frame > *last_frame) throw std::invalid_argument("empty frame range");
}

namespace {

bool in_range(FrameId f, const MatchConfig& c) {
  return (!c.first_frame || f >= *c.first_frame) && (!c.last_frame || f <= *c.last_frame);
}

template <typename Key>
std::optional<double> reciprocal_mean(const std::map<Key, std::set<std::int64_t>>& partners) {
  if (partners.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [_, ids] : partners) sum += 1.0 / static_cast<double>(ids.size());
  return sum / static_cast<double>(partners.size());
}

}  // namespace

double jaccard(const std::vector<MobileId>& a, const std::set<MobileId>& b) {
  std::size_t inter = 0;
  for (auto m : std::set<MobileId>(a.begin(), a.end())) inter += b.count(m);
  const std::size_t uni = std::set<MobileId>(a.begin(), a.end()).size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

MatchResult match_frames(const std::vector<GroupSnapshot>& tracked, const std::vector<GroundTruthGroup>& gt,
                         const MatchConfig& config) {
  config.validate();
  std::map<FrameId, std::vector<const GroupSnapshot*>> by_frame_t;
  std::map<FrameId, std::vector<std::pair<std::int64_t, const std::set<MobileId>*>>> by_frame_g;
  for (const auto& s : tracked)
    if (in_range(s.frame, config)) by_frame_t[s.frame].push_back(&s);
  for (const auto& g : gt)
    for (const auto& [f, members] : g.members)
      if (in_range(f, config)) by_frame_g[f].emplace_back(g.gt_id, &members);

  std::set<FrameId> frames;
  for (const auto& [f, _] : by_frame_t) frames.insert(f);
  for (const auto& [f, _] : by_frame_g) frames.insert(f);

  MatchResult r;
  for (auto f : frames) {
    const auto& ts = by_frame_t[f];
    const auto& gs = by_frame_g[f];
    struct Cand {
      double j;
      GroupId t;
      std::int64_t g;
      std::size_t ti, gi;
      const std::vector<MobileId>* members;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < ts.size(); ++i)
      for (std::size_t k = 0; k < gs.size(); ++k) {
        const double j = jaccard(ts[i]->members, *gs[k].second);
        if (j >= config.jaccard_threshold) cands.push_back({j, ts[i]->group, gs[k].first, i, k, &ts[i]->members});
      }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.j != b.j) return a.j > b.j;
      if (a.g != b.g) return a.g < b.g;
      // member sets rather than ids, so renaming tracked groups changes nothing
      return *a.members < *b.members;
    });
    std::vector<bool> t_used(ts.size()), g_used(gs.size());
    std::size_t matched = 0;
    for (const auto& c : cands) {
      if (t_used[c.ti] || g_used[c.gi]) continue;
      t_used[c.ti] = g_used[c.gi] = true;
      r.matches.push_back({f, c.t, c.g, c.j});
      ++matched;
    }
    r.tp += matched;
    r.fp += ts.size() - matched;
    r.fn += gs.size() - matched;
  }
  return r;
}

PrecisionSensitivity precision_sensitivity(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  PrecisionSensitivity ps;
  if (tp + fp > 0) ps.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) ps.sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return ps;
}

std::optional<double> fragmentation(const MatchResult& result) {
  std::map<std::int64_t, std::set<std::int64_t>> ids;
  for (const auto& m : result.matches) ids[m.gt].insert(m.tracked);
  return reciprocal_mean(ids);
}

std::optional<double> purity(const MatchResult& result) {
  std::map<GroupId, std::set<std::int64_t>> ids;
  for (const auto& m : result.matches) ids[m.tracked].insert(m.gt);
  return reciprocal_mean(ids);
}

std::optional<double> tracking_time(const MatchResult& result, const std::vector<GroundTruthGroup>& gt,
                                    const MatchConfig& config) {
  std::map<std::int64_t, std::size_t> matched;
  for (const auto& m : result.matches) ++matched[m.gt];
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& g : gt) {
    std::size_t exists = 0;
    for (const auto& [f, _] : g.members) exists += in_range(f, config);
    if (exists == 0) continue;
    sum += static_cast<double>(matched[g.gt_id]) / static_cast<double>(exists);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

MetricsReport evaluate(const std::vector<GroupSnapshot>& tracked, const std::vector<GroundTruthGroup>& gt,
                       const MatchConfig& config) {
  auto m = match_frames(tracked, gt, config);
  MetricsReport r;
  r.tp = m.tp;
  r.fp = m.fp;
  r.fn = m.fn;
  auto ps = precision_sensitivity(m.tp, m.fp, m.fn);
  r.precision = ps.precision;
  r.sensitivity = ps.sensitivity;
  r.fragmentation = fragmentation(m);
  r.tracking_time = tracking_time(m, gt, config);
  r.purity = purity(m);
  return r;
}

namespace {

std::string opt(const std::optional<double>& v, bool table) {
  if (!v) return table ? "n/a" : "";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << *v;
  return s.str();
}

}  // namespace

void write_report_table(std::ostream& out, const MetricsReport& r) {
  auto row = [&](const char* k, const std::string& v) { out << std::left << std::setw(16) << k << v << '\n'; };
  row("TP", std::to_string(r.tp));
  row("FP", std::to_string(r.fp));
  row("FN", std::to_string(r.fn));
  row("precision", opt(r.precision, true));
  row("sensitivity", opt(r.sensitivity, true));
  row("fragmentation", opt(r.fragmentation, true));
  row("tracking_time", opt(r.tracking_time, true));
  row("purity", opt(r.purity, true));
}

void write_report_csv(std::ostream& out, const MetricsReport& r) {
  out << "tp,fp,fn,precision,sensitivity,fragmentation,tracking_time,purity\n";
  out << r.tp << ',' << r.fp << ',' << r.fn << ',' << opt(r.precision, false) << ',' << opt(r.sensitivity, false) << ','
      << opt(r.fragmentation, false) << ',' << opt(r.tracking_time, false) << ',' << opt(r.purity, false) << '\n';
}

}  // namespace grouptrack
