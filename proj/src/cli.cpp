#include "twr/cli.hpp"

#include "twr/permission_engine.hpp"
#include "twr/prox_detector.hpp"
#include "twr/sensor_model.hpp"
#include "twr/synth_harness.hpp"
#include "twr/tap_detector.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>

namespace twr::cli {

namespace {

struct ProxFlags {
    ProxConfig cfg;
    double epsilon_cm = 0.5;

    void attach(CLI::App* app) {
        app->add_option("--wind-sz", cfg.wind_sz, "Changes that must fall inside the time limit")
            ->capture_default_str();
        app->add_option("--wave-time-limit-ms", cfg.wave_time_limit, "Maximum span of wind-sz changes (ms)")
            ->capture_default_str();
        app->add_option("--unlock-time-frame-ms", cfg.unlock_time_frame, "How long a detection unlocks (ms)")
            ->capture_default_str();
        app->add_option("--prox-epsilon-cm", epsilon_cm, "Minimum reading change counted as a transition (cm)")
            ->capture_default_str();
    }
};

void attach_gen_params(CLI::App* app, GenParams& p) {
    app->add_option("--seed", p.rng_seed, "RNG seed")->capture_default_str();
    app->add_option("--sample-rate-hz", p.sample_rate_hz, "Accelerometer sample rate")->capture_default_str();
    app->add_option("--noise-sigma", p.noise_sigma, "Resting noise (m/s^2)")->capture_default_str();
    app->add_option("--impulse-amplitude", p.impulse_amplitude, "Tap lobe peak (m/s^2)")->capture_default_str();
    app->add_option("--impulse-width-ms", p.impulse_width_ms, "Tap lobe width (ms)")->capture_default_str();
    app->add_option("--taps", p.taps_per_window, "Taps per window (1-3)")->capture_default_str();
    app->add_option("--tap-jitter-ms", p.tap_jitter_ms, "Tap timing jitter (ms)")->capture_default_str();
    app->add_option("--session-variation", p.session_variation, "Day-to-day drift of tapping habits (0 to 2)")
        ->capture_default_str();
    app->add_option("--prox-period-ms", p.prox_transition_period_ms, "Wave transition period (ms)")
        ->capture_default_str();
    app->add_option("--prox-stream-ms", p.prox_stream_ms, "Proximity stream length (ms)")->capture_default_str();
    app->add_option("--slip-rate", p.gesture_slip_rate, "Probability of a botched wave/rub")->capture_default_str();
}

GestureDatabase load_or_new(const std::string& path) {
    if (std::filesystem::exists(path))
        return load_db(path);
    return GestureDatabase{};
}

AxisRule rule_from(const std::string& text) {
    return parse_axis_rule(text);
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
    std::vector<std::string> traces;
    std::size_t n = 100;
    std::string axis_rule = "mean";
    std::string id;
    std::string db;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
    if (a.traces.size() < 2)
        throw std::invalid_argument("need at least 2 traces (got " + std::to_string(a.traces.size()) + ")");
    std::vector<AccelTrace> traces;
    for (const auto& f : a.traces)
        traces.push_back(load_accel_trace(f));
    auto db = load_or_new(a.db);
    const auto& t = db.create_template(a.id, traces, a.n, rule_from(a.axis_rule));
    save_db(db, a.db);
    out << "template=" << a.id << " n=" << t.n() << " m=" << t.created_from()
        << " axis_rule=" << to_string(t.axis_rule()) << '\n';
    out << "threshold=" << format_real(t.threshold()) << '\n';
    return kSuccess;
}

// --- match -----------------------------------------------------------------

struct MatchArgs {
    std::string trace;
    std::string id;
    std::string db;
};

int cmd_match(const MatchArgs& a, std::ostream& out, std::ostream& err) {
    const auto db = load_db(a.db);
    const auto* t = db.find_template(a.id);
    if (!t) {
        err << "error: unknown template '" << a.id << "'\n";
        return kError;
    }
    const auto r = match(load_accel_trace(a.trace), *t);
    out << "score=" << format_real(r.score) << " matched=" << (r.matched ? "true" : "false") << '\n';
    return r.matched ? kSuccess : kNegative;
}

// --- prox-run --------------------------------------------------------------

int cmd_prox_run(const std::string& file, const ProxFlags& f, std::ostream& out) {
    for (const auto& w : run_detector(load_prox_trace(file), f.cfg, f.epsilon_cm))
        out << "unlock," << w.start << ',' << w.end << '\n';
    return kSuccess;
}

// --- db --------------------------------------------------------------------

struct DbArgs {
    std::string db;
    std::string service;
    std::string kind = "prox";
    std::string template_id;
    Millis capture_window = 2000;
    std::string id;
};

int cmd_db_list(const DbArgs& a, std::ostream& out) {
    const auto db = load_db(a.db);
    for (const auto& [service, p] : db.policies()) {
        out << "policy service=" << service << " kind=" << to_string(p.kind);
        if (p.template_id)
            out << " template=" << *p.template_id;
        out << " capture_window_ms=" << p.capture_window << '\n';
    }
    for (const auto& [id, t] : db.templates())
        out << "template id=" << id << " n=" << t.n() << " axis_rule=" << to_string(t.axis_rule())
            << " threshold=" << format_real(t.threshold()) << " created_from=" << t.created_from() << '\n';
    return kSuccess;
}

int cmd_db_add_policy(const DbArgs& a, std::ostream& out) {
    auto db = load_or_new(a.db);
    GesturePolicy p;
    p.service = a.service;
    p.kind = parse_protection_kind(a.kind);
    if (!a.template_id.empty())
        p.template_id = a.template_id;
    p.capture_window = a.capture_window;
    db.register_policy(p);
    save_db(db, a.db);
    out << "added policy service=" << a.service << " kind=" << to_string(p.kind) << '\n';
    return kSuccess;
}

int cmd_db_rm_policy(const DbArgs& a, std::ostream& out, std::ostream& err) {
    auto db = load_db(a.db);
    if (!db.remove_policy(a.service)) {
        err << "warning: no policy for service '" << a.service << "'\n";
        return kSuccess;
    }
    save_db(db, a.db);
    out << "removed policy service=" << a.service << '\n';
    return kSuccess;
}

int cmd_db_rm_template(const DbArgs& a, std::ostream& out, std::ostream& err) {
    auto db = load_db(a.db);
    if (!db.remove_template(a.id)) {
        err << "warning: no template '" << a.id << "'\n";
        return kSuccess;
    }
    save_db(db, a.db);
    out << "removed template id=" << a.id << '\n';
    return kSuccess;
}

// --- replay ----------------------------------------------------------------

struct ReplayArgs {
    std::string scenario;
    std::string db;
    ProxFlags prox;
    Millis wait_forward_ms = 0;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out) {
    const auto db = load_db(a.db);
    const auto s = load_scenario(a.scenario);
    EngineOptions opts;
    opts.wait_forward_ms = a.wait_forward_ms;
    const auto result = run_scenario(s, db, a.prox.cfg, a.prox.epsilon_cm, opts);
    out << result.format_log();
    for (const auto i : result.mismatches) {
        const auto& exp = s.requests[i];
        out << "mismatch t=" << exp.request.t << " expected=" << to_string(exp.expected);
        if (exp.expected_reason)
            out << '/' << to_string(*exp.expected_reason);
        out << " got=" << to_string(result.log[i].decision.outcome) << '/'
            << to_string(result.log[i].decision.reason) << '\n';
    }
    out << "mismatches=" << result.mismatches.size() << '\n';
    return result.mismatches.empty() ? kSuccess : kNegative;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
    std::string suite;
    GenParams params;
    std::size_t traces = 150;
    std::size_t training = 30;
    std::size_t n = 100;
    std::string axis_rule = "mean";
    ProxFlags prox;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    EvalReport report;
    if (a.suite == "tap") {
        TapEvalConfig cfg;
        cfg.params = a.params;
        cfg.traces_per_cell = a.traces;
        cfg.training_traces = a.training;
        cfg.n = a.n;
        cfg.rule = rule_from(a.axis_rule);
        report = default_tap_evaluation(cfg);
    } else if (a.suite == "prox") {
        ProxEvalConfig cfg;
        cfg.params = a.params;
        cfg.traces_per_cell = a.traces;
        cfg.detector = a.prox.cfg;
        cfg.epsilon_cm = a.prox.epsilon_cm;
        report = default_prox_evaluation(cfg);
    } else {
        throw std::invalid_argument("unknown suite '" + a.suite + "' (expected tap or prox)");
    }
    out << report.format_table() << report.format_machine();
    return kSuccess;
}

// --- gen -------------------------------------------------------------------

struct GenArgs {
    std::string kind;
    std::string out;
    GenParams params;
};

std::string provenance(const std::string& kind, const GenParams& p) {
    return "# generator: " + kind + " seed=" + std::to_string(p.rng_seed) + " rng=" + std::string(Rng::kAlgorithm) +
           "\n";
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot write '" + path + "'");
    f << text;
    if (!f)
        throw std::runtime_error("failed writing '" + path + "'");
}

int cmd_gen(const GenArgs& a, std::ostream& out) {
    auto p = a.params;
    const auto& k = a.kind;
    if (k == "tap-once" || k == "tap-twice" || k == "tap-thrice") {
        p.taps_per_window = k == "tap-once" ? 1 : k == "tap-twice" ? 2 : 3;
        write_text(a.out, provenance(k, p) + format_accel_trace(gen_tap_trace(p)));
    } else if (k == "tap") {
        write_text(a.out, provenance(k, p) + format_accel_trace(gen_tap_trace(p)));
    } else if (k == "pickpocket" || k == "legit-nfc" || k == "legit-sms") {
        const auto s = k == "pickpocket"  ? make_pickpocket_scenario(p)
                       : k == "legit-nfc" ? make_legit_nfc_scenario(p)
                                          : make_legit_sms_scenario(p);
        save_scenario(s, a.out);
    } else if (k == "demo-db") {
        save_db(make_demo_database(p), a.out);
    } else {
        bool done = false;
        for (const auto act : kAllActivities)
            if (to_string(act) == k) {
                write_text(a.out, provenance(k, p) + format_accel_trace(gen_activity_trace(act, p)));
                done = true;
            }
        for (const auto pk : kAllProxKinds)
            if (!done && to_string(pk) == k) {
                write_text(a.out, provenance(k, p) + format_prox_trace(gen_prox_stream(pk, p)));
                done = true;
            }
        if (!done)
            throw std::invalid_argument("unknown generator kind '" + k + "'");
    }
    out << "wrote " << a.out << '\n';
    return kSuccess;
}

std::string gen_kinds() {
    std::string s = "tap, tap-once, tap-twice, tap-thrice";
    for (const auto a : kAllActivities)
        s += ", " + std::string(to_string(a));
    for (const auto k : kAllProxKinds)
        s += ", " + std::string(to_string(k));
    return s + ", pickpocket, legit-nfc, legit-sms, demo-db";
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tap-Wave-Rub gesture-gated permission toolkit"};
    app.name("twr");
    app.require_subcommand(1);

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Build a tap template from training traces and store it");
    train_cmd->add_option("traces", train.traces, "Accelerometer trace files")->required();
    train_cmd->add_option("--n", train.n, "Template length in samples")->capture_default_str();
    train_cmd->add_option("--axis-rule", train.axis_rule, "mean | min | all_axes")->capture_default_str();
    train_cmd->add_option("--template-id", train.id, "Template id")->required();
    train_cmd->add_option("--db", train.db, "Gesture database file (created if absent)")->required();

    MatchArgs match_args;
    auto* match_cmd = app.add_subcommand("match", "Score one trace against a stored template");
    match_cmd->add_option("trace", match_args.trace, "Accelerometer trace file")->required();
    match_cmd->add_option("--template-id", match_args.id, "Template id")->required();
    match_cmd->add_option("--db", match_args.db, "Gesture database file")->required();

    std::string prox_file;
    ProxFlags prox_flags;
    auto* prox_cmd = app.add_subcommand("prox-run", "Run the proximity detector over a trace");
    prox_cmd->add_option("trace", prox_file, "Proximity trace file")->required();
    prox_flags.attach(prox_cmd);

    DbArgs db_args;
    auto* db_cmd = app.add_subcommand("db", "Administer a gesture database");
    db_cmd->require_subcommand(1);
    auto* db_list = db_cmd->add_subcommand("list", "Print policies and templates");
    auto* db_add = db_cmd->add_subcommand("add-policy", "Add or replace a service policy");
    auto* db_rm = db_cmd->add_subcommand("rm-policy", "Remove a service policy");
    auto* db_rmt = db_cmd->add_subcommand("rm-template", "Remove an unused template");
    for (auto* c : {db_list, db_add, db_rm, db_rmt})
        c->add_option("--db", db_args.db, "Gesture database file")->required();
    db_add->add_option("--service", db_args.service, "Service name")->required();
    db_add->add_option("--kind", db_args.kind, "tap | prox | none")->capture_default_str();
    db_add->add_option("--template-id", db_args.template_id, "Template guarding a tap policy");
    db_add->add_option("--capture-window-ms", db_args.capture_window, "Sensor window before a request (ms)")
        ->capture_default_str();
    db_rm->add_option("--service", db_args.service, "Service name")->required();
    db_rmt->add_option("--template-id", db_args.id, "Template id")->required();

    ReplayArgs replay;
    auto* replay_cmd = app.add_subcommand("replay", "Replay a scenario through the permission engine");
    replay_cmd->add_option("scenario", replay.scenario, "Scenario file")->required();
    replay_cmd->add_option("--db", replay.db, "Gesture database file")->required();
    replay_cmd->add_option("--wait-forward-ms", replay.wait_forward_ms, "Also scan this long after each request")
        ->capture_default_str();
    replay.prox.attach(replay_cmd);

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Run a synthetic evaluation and print the confusion matrix");
    eval_cmd->add_option("suite", eval.suite, "tap | prox")->required();
    eval_cmd->add_option("--traces", eval.traces, "Traces per cell")->capture_default_str();
    eval_cmd->add_option("--training", eval.training, "Training traces per template")->capture_default_str();
    eval_cmd->add_option("--n", eval.n, "Template length in samples")->capture_default_str();
    eval_cmd->add_option("--axis-rule", eval.axis_rule, "mean | min | all_axes")->capture_default_str();
    attach_gen_params(eval_cmd, eval.params);
    eval.prox.attach(eval_cmd);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic trace, scenario or demo database");
    gen_cmd->add_option("kind", gen.kind, gen_kinds())->required();
    gen_cmd->add_option("--out", gen.out, "Output path")->required();
    attach_gen_params(gen_cmd, gen.params);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kError;
    }

    try {
        if (train_cmd->parsed())
            return cmd_train(train, out);
        if (match_cmd->parsed())
            return cmd_match(match_args, out, err);
        if (prox_cmd->parsed())
            return cmd_prox_run(prox_file, prox_flags, out);
        if (db_list->parsed())
            return cmd_db_list(db_args, out);
        if (db_add->parsed())
            return cmd_db_add_policy(db_args, out);
        if (db_rm->parsed())
            return cmd_db_rm_policy(db_args, out, err);
        if (db_rmt->parsed())
            return cmd_db_rm_template(db_args, out, err);
        if (replay_cmd->parsed())
            return cmd_replay(replay, out);
        if (eval_cmd->parsed())
            return cmd_eval(eval, out);
        if (gen_cmd->parsed())
            return cmd_gen(gen, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kError;
    }
    return kError;
}

} // namespace twr::cli
