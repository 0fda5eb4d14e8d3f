#include "grouptrack/cli.hpp"

#include "grouptrack/classifier.hpp"
#include "grouptrack/evaluation.hpp"
#include "grouptrack/pipeline.hpp"
#include "grouptrack/screk/optimize.hpp"
#include "grouptrack/screk/parser.hpp"
#include "grouptrack/synth.hpp"
#include "grouptrack/tracker.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <sstream>

namespace grouptrack {

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Writes to `path`, or to `fallback` when the path is empty.
template <typename F>
void write_output(const std::string& path, std::ostream* fallback, F&& write) {
  if (path.empty()) {
    if (fallback) write(*fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  write(f);
  if (!f) throw IoError("error while writing '" + path + "'");
}

struct TrackOptions {
  std::string detections, context, classes, out_groups, out_lifecycle;
  bool flush = false;
  TrackerParams params;
};

struct RecognizeOptions {
  std::string groups, lifecycle, prelude, out_events;
  std::vector<std::string> scenarios;
  std::string min_alarm = "NOTURGENT";
  bool include_primitives = false;
  RecognizeParams params;
};

struct EvaluateOptions {
  std::string groups, ground_truth, out_csv;
  MatchConfig match;
  std::optional<FrameId> first, last;
};

struct SynthOptions {
  std::string scenario = "walk-together";
  std::string out_detections, out_ground_truth, out_context;
  SynthParams params;
};

void add_track_options(CLI::App* app, TrackOptions& o, bool groups_output) {
  app->add_option("--detections", o.detections, "detection CSV")->required();
  app->add_option("--context", o.context, "scene context file")->required();
  app->add_option("--classes", o.classes, "class size models (default models otherwise)");
  if (groups_output) {
    app->add_option("--out-groups", o.out_groups, "group CSV (stdout when omitted)");
  } else {
    app->add_option("--out-groups", o.out_groups, "group CSV");
  }
  app->add_option("--out-lifecycle", o.out_lifecycle, "lifecycle event CSV");
  app->add_flag("--flush", o.flush, "also report the trailing window at end of stream");
  app->add_option("--window", o.params.window, "window length T (frames)");
  app->add_option("--tolerance", o.params.tolerance, "Mean-Shift tolerance");
  app->add_option("--link-threshold", o.params.link_threshold, "minimum father link probability");
  app->add_option("--max-speed", o.params.max_speed, "speed normalization bound (m/s)");
  app->add_option("--incoherence-threshold", o.params.incoherence_threshold, "group coherence threshold");
  app->add_option("--w-dist", o.params.w_distance, "incoherence weight of the mean distance");
  app->add_option("--w-speed", o.params.w_speed, "incoherence weight of the speed spread");
  app->add_option("--w-dir", o.params.w_direction, "incoherence weight of the direction spread");
  app->add_option("--stale-factor", o.params.stale_factor, "groups idle for this many windows are erased");
}

void add_recognize_options(CLI::App* app, RecognizeOptions& o) {
  app->add_option("--scenarios", o.scenarios, "scenario files")->required();
  app->add_option("--prelude", o.prelude, "replaces the built-in prelude");
  app->add_option("--min-alarm", o.min_alarm, "NOTURGENT, URGENT or VERYURGENT");
  app->add_option("--max-gap", o.params.max_gap, "false frames tolerated inside an interval");
  app->add_option("--stop-speed", o.params.primitives.stop_speed, "Group_Stop speed threshold (m/s)");
  app->add_option("--near-distance", o.params.primitives.near_distance, "Group_Near_Equipment distance (m)");
  app->add_option("--lively-stddev", o.params.primitives.lively_stddev, "Group_Lively speed spread (m/s)");
  app->add_flag("--include-primitives", o.include_primitives, "also write primitive intervals");
  app->add_option("--out-events", o.out_events, "event CSV (stdout when omitted)");
}

struct Inputs {
  DetectionStream detections;
  SceneContext context;
};

Inputs load_inputs(const std::string& detections, const std::string& context, const std::string& classes) {
  Inputs in;
  in.context = parse_context(read_file(context));
  in.detections = parse_detections(read_file(detections));
  auto models = classes.empty() ? default_class_models() : parse_class_models(read_file(classes));
  for (const auto& m : models) m.validate();
  classify_all(in.detections, models);
  return in;
}

TrackingResult do_track(const TrackOptions& o, const Inputs& in) {
  o.params.validate();
  return track_stream(in.detections, o.params, in.context, o.flush);
}

void write_tracking(const TrackOptions& o, const TrackingResult& r, std::ostream* groups_fallback) {
  write_output(o.out_groups, groups_fallback, [&](std::ostream& s) { write_groups(s, r.snapshots); });
  write_output(o.out_lifecycle, nullptr, [&](std::ostream& s) { write_lifecycle(s, r.events); });
}

screk::Ontology load_scenarios(const RecognizeOptions& o) {
  screk::Ontology prelude = o.prelude.empty() ? screk::builtin_prelude()
                                              : screk::parse_ontology(read_file(o.prelude), screk::Ontology{});
  std::vector<std::string> texts;
  for (const auto& p : o.scenarios) texts.push_back(read_file(p));
  return load_ontology(texts, prelude);
}

void do_recognize(RecognizeOptions o, const Inputs& in, const std::vector<GroupSnapshot>& groups,
                  const std::vector<GroupLifecycleEvent>& lifecycle, std::ostream& out) {
  auto level = screk::alarm_level_from_string(o.min_alarm);
  if (!level) throw std::invalid_argument("unknown alarm level '" + o.min_alarm + "'");
  o.params.min_alarm = *level;
  if (o.params.max_gap < 0) throw std::invalid_argument("max gap must be non-negative");
  o.params.primitives.validate();
  const auto ontology = load_scenarios(o);
  const auto r = recognize(ontology, in.detections, in.context, groups, lifecycle, o.params);
  write_output(o.out_events, &out, [&](std::ostream& s) {
    write_events(s, r.events);
    if (o.include_primitives) write_events(s, r.primitives);
  });
}

int report(std::ostream& err, int code, const std::string& what) {
  err << "grouptrack: " << what << '\n';
  return code;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Group tracking and scenario recognition"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  app.set_config("--config", "", "INI or TOML file; options go in a section named after the subcommand");

  TrackOptions track;
  RecognizeOptions rec;
  EvaluateOptions eval;
  SynthOptions synth;
  std::string rec_detections, rec_context, rec_classes;

  auto* t = app.add_subcommand("track", "track groups in a detection stream");
  t->fallthrough();
  add_track_options(t, track, true);

  auto* r = app.add_subcommand("recognize", "recognize scenarios over tracked groups");
  r->fallthrough();
  r->add_option("--detections", rec_detections, "detection CSV")->required();
  r->add_option("--context", rec_context, "scene context file")->required();
  r->add_option("--classes", rec_classes, "class size models (default models otherwise)");
  r->add_option("--groups", rec.groups, "group CSV from track")->required();
  r->add_option("--lifecycle", rec.lifecycle, "lifecycle CSV from track");
  add_recognize_options(r, rec);

  auto* u = app.add_subcommand("run", "track groups and recognize scenarios");
  u->fallthrough();
  add_track_options(u, track, false);
  add_recognize_options(u, rec);

  auto* e = app.add_subcommand("evaluate", "compare tracked groups with ground truth");
  e->fallthrough();
  e->add_option("--groups", eval.groups, "group CSV")->required();
  e->add_option("--ground-truth", eval.ground_truth, "ground-truth CSV")->required();
  e->add_option("--jaccard", eval.match.jaccard_threshold, "minimum Jaccard index of a match");
  e->add_option("--first-frame", eval.first, "first evaluated frame");
  e->add_option("--last-frame", eval.last, "last evaluated frame");
  e->add_option("--out-csv", eval.out_csv, "metrics CSV");

  auto* s = app.add_subcommand("synth", "generate a synthetic scenario");
  s->fallthrough();
  s->add_option("--scenario", synth.scenario,
                "walk-together, split-after-N, merge-at-N, stop-near-equipment or fig4");
  s->add_option("--seed", synth.params.seed, "random seed");
  s->add_option("--n", synth.params.n, "split or merge frame");
  s->add_option("--frames", synth.params.frames, "sequence length (0: scenario default)");
  s->add_option("--agents", synth.params.agents, "walkers of walk-together");
  s->add_option("--equipment-name", synth.params.equipment_name, "equipment of stop-near-equipment");
  s->add_option("--noise", synth.params.noise, "position noise (m)");
  s->add_option("--out-detections", synth.out_detections, "detection CSV (stdout when omitted)");
  s->add_option("--out-ground-truth", synth.out_ground_truth, "ground-truth CSV");
  s->add_option("--out-context", synth.out_context, "scene context file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "grouptrack: " << ex.what() << '\n';
    err << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (t->parsed()) {
      const auto in = load_inputs(track.detections, track.context, track.classes);
      write_tracking(track, do_track(track, in), &out);
    } else if (r->parsed()) {
      const auto in = load_inputs(rec_detections, rec_context, rec_classes);
      const auto groups = parse_groups(read_file(rec.groups));
      const auto lifecycle = rec.lifecycle.empty() ? std::vector<GroupLifecycleEvent>{}
                                                   : parse_lifecycle(read_file(rec.lifecycle));
      do_recognize(rec, in, groups, lifecycle, out);
    } else if (u->parsed()) {
      const auto in = load_inputs(track.detections, track.context, track.classes);
      const auto tracked = do_track(track, in);
      write_tracking(track, tracked, nullptr);
      do_recognize(rec, in, tracked.snapshots, tracked.events, out);
    } else if (e->parsed()) {
      eval.match.first_frame = eval.first;
      eval.match.last_frame = eval.last;
      eval.match.validate();
      const auto groups = parse_groups(read_file(eval.groups));
      const auto gt = parse_ground_truth(read_file(eval.ground_truth));
      const auto rep = evaluate(groups, gt, eval.match);
      write_report_table(out, rep);
      write_output(eval.out_csv, nullptr, [&](std::ostream& f) { write_report_csv(f, rep); });
    } else if (s->parsed()) {
      auto sc = synth_scenario_from_string(synth.scenario);
      if (!sc) throw std::invalid_argument("unknown scenario '" + synth.scenario + "'");
      synth.params.scenario = *sc;
      const auto o = synthesize(synth.params);
      write_output(synth.out_detections, &out, [&](std::ostream& f) { write_detections(f, o.detections); });
      write_output(synth.out_ground_truth, nullptr, [&](std::ostream& f) { write_ground_truth(f, o.ground_truth); });
      write_output(synth.out_context, nullptr, [&](std::ostream& f) { write_context(f, o.context); });
    }
  } catch (const ParseError& ex) {
    return report(err, kExitInvalid, ex.what());
  } catch (const EngineError& ex) {
    err << "grouptrack: " << ex.what() << '\n';
    for (const auto& d : ex.diagnostics()) err << "  " << screk::format_diagnostic(d) << '\n';
    return kExitInvalid;
  } catch (const screk::OptimizeError& ex) {
    return report(err, kExitInvalid, ex.what());
  } catch (const std::invalid_argument& ex) {
    return report(err, kExitInvalid, ex.what());
  } catch (const std::exception& ex) {
    return report(err, kExitRuntime, ex.what());
  }
  return kExitOk;
}

}  // namespace grouptrack
