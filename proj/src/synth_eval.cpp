#include "twr/synth_harness.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <sstream>

namespace twr {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string percent(double rate) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(2) << rate * 100.0 << '%';
    return ss.str();
}

double pooled(const std::vector<EvalCell>& cells, bool positive) {
    std::size_t matches = 0, total = 0;
    for (const auto& c : cells)
        if (c.expected_positive == positive) {
            matches += c.matches;
            total += c.total;
        }
    if (total == 0)
        return 0.0;
    const double rate = static_cast<double>(matches) / static_cast<double>(total);
    return positive ? 1.0 - rate : rate;
}

// Stream ids keep the training, test and activity corpora on disjoint seeds.
constexpr std::uint64_t kTrainStream = 100;
constexpr std::uint64_t kTestStream = 200;
constexpr std::uint64_t kActivityStream = 300;
constexpr std::uint64_t kProxStream = 400;

/// count taps split into sessions of at most per_session traces.
std::vector<AccelTrace> test_taps(const GenParams& p, std::size_t count, std::size_t per_session, std::uint64_t stream) {
    per_session = std::max<std::size_t>(per_session, 1);
    const std::size_t sessions = (count + per_session - 1) / per_session;
    auto out = tap_session_corpus(p, sessions, per_session, stream);
    out.resize(count, out.front());
    return out;
}

} // namespace

EvalCell make_cell(std::string gesture, std::string activity, std::size_t matches, std::size_t total,
                   bool expected_positive) {
    if (total == 0)
        throw std::invalid_argument("empty corpus for cell " + gesture + " / " + activity);
    if (matches > total)
        throw std::invalid_argument("more matches than traces");
    EvalCell c;
    c.gesture = std::move(gesture);
    c.activity = std::move(activity);
    c.matches = matches;
    c.total = total;
    c.rate = static_cast<double>(matches) / static_cast<double>(total);
    c.expected_positive = expected_positive;
    return c;
}

const EvalCell* EvalReport::cell(std::string_view gesture, std::string_view activity) const {
    const auto it = std::find_if(cells.begin(), cells.end(), [&](const EvalCell& c) {
        return c.gesture == gesture && c.activity == activity;
    });
    return it == cells.end() ? nullptr : &*it;
}

double EvalReport::fnr() const {
    return pooled(cells, true);
}

double EvalReport::fpr() const {
    return pooled(cells, false);
}

std::string EvalReport::format_table() const {
    std::size_t row_w = 0;
    for (const auto& r : rows)
        row_w = std::max(row_w, r.size());
    std::vector<std::size_t> col_w;
    for (const auto& c : columns)
        col_w.push_back(std::max<std::size_t>(c.size(), 7));

    std::ostringstream out;
    if (!title.empty())
        out << title << '\n';
    out << std::left << std::setw(static_cast<int>(row_w)) << "";
    for (std::size_t j = 0; j < columns.size(); ++j)
        out << " | " << std::setw(static_cast<int>(col_w[j])) << columns[j];
    out << '\n' << std::string(row_w, '-');
    for (const auto w : col_w)
        out << "-+-" << std::string(w, '-');
    out << '\n';
    for (const auto& r : rows) {
        out << std::left << std::setw(static_cast<int>(row_w)) << r;
        for (std::size_t j = 0; j < columns.size(); ++j) {
            const auto* c = cell(r, columns[j]);
            out << " | " << std::right << std::setw(static_cast<int>(col_w[j])) << (c ? percent(c->rate) : "-")
                << std::left;
        }
        out << '\n';
    }
    out << "fnr=" << format_real(fnr()) << " fpr=" << format_real(fpr()) << " runtime_ms=" << std::fixed
        << std::setprecision(1) << runtime_ms << '\n';
    return out.str();
}

std::string EvalReport::format_machine() const {
    std::string out;
    for (const auto& c : cells)
        out += c.gesture + "," + c.activity + "," + std::to_string(c.matches) + "," + std::to_string(c.total) + "," +
               format_real(c.rate) + "\n";
    return out;
}

EvalReport run_tap_evaluation(std::span<const NamedTemplate> templates, std::span<const NamedAccelCorpus> corpora) {
    const auto start = Clock::now();
    EvalReport report;
    report.title = "Phone tapping detection (match rate of row template against column corpus)";
    for (const auto& [name, t] : templates)
        report.rows.push_back(name);
    for (const auto& [name, traces] : corpora)
        report.columns.push_back(name);

    for (const auto& [gesture, tmpl] : templates)
        for (const auto& [activity, traces] : corpora) {
            std::size_t matches = 0;
            for (const auto& tr : traces)
                if (match(tr, tmpl).matched)
                    ++matches;
            report.cells.push_back(make_cell(gesture, activity, matches, traces.size(), gesture == activity));
        }
    report.runtime_ms = elapsed_ms(start);
    return report;
}

EvalReport run_prox_evaluation(std::span<const NamedProxCorpus> corpora, const ProxConfig& cfg, double epsilon_cm,
                               std::span<const std::string> gesture_columns) {
    const auto start = Clock::now();
    EvalReport report;
    report.title = "Hand waving, finger tapping / rubbing detection (unlock rate per corpus)";
    const std::string row = "Tap-Wave-Rub";
    report.rows.push_back(row);
    for (const auto& [activity, streams] : corpora) {
        report.columns.push_back(activity);
        std::size_t unlocked = 0;
        for (const auto& s : streams)
            if (!run_detector(s, cfg, epsilon_cm).empty())
                ++unlocked;
        const bool positive =
            std::find(gesture_columns.begin(), gesture_columns.end(), activity) != gesture_columns.end();
        report.cells.push_back(make_cell(row, activity, unlocked, streams.size(), positive));
    }
    report.runtime_ms = elapsed_ms(start);
    return report;
}

EvalReport default_tap_evaluation(const TapEvalConfig& cfg) {
    const auto start = Clock::now();
    std::vector<NamedTemplate> templates;
    std::vector<NamedAccelCorpus> corpora;
    for (int taps = 1; taps <= 3; ++taps) {
        GenParams p = cfg.params;
        p.taps_per_window = taps;
        const auto name = std::string(tap_gesture_name(taps));
        // One training session, then fresh sessions of test taps (days of use).
        const auto training = tap_session_corpus(p, 1, cfg.training_traces, kTrainStream + taps);
        templates.emplace_back(name, build_template(training, cfg.n, cfg.rule));
        corpora.emplace_back(name, test_taps(p, cfg.traces_per_cell, cfg.training_traces, kTestStream + taps));
    }
    std::uint64_t k = 0;
    for (const auto a : kAllActivities)
        corpora.emplace_back(std::string(display_name(a)),
                             activity_corpus(a, cfg.params, cfg.traces_per_cell, kActivityStream + k++));

    auto report = run_tap_evaluation(templates, corpora);
    report.runtime_ms = elapsed_ms(start);
    return report;
}

EvalReport default_prox_evaluation(const ProxEvalConfig& cfg) {
    const auto start = Clock::now();
    std::vector<NamedProxCorpus> corpora;
    std::uint64_t k = 0;
    for (const auto kind : kAllProxKinds)
        corpora.emplace_back(std::string(display_name(kind)),
                             prox_corpus(kind, cfg.params, cfg.traces_per_cell, kProxStream + k++));
    const std::vector<std::string> gestures = {std::string(display_name(ProxKind::Wave)),
                                               std::string(display_name(ProxKind::TapRub))};
    auto report = run_prox_evaluation(corpora, cfg.detector, cfg.epsilon_cm, gestures);
    report.runtime_ms = elapsed_ms(start);
    return report;
}

} // namespace twr
