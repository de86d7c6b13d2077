#include "twr/synth_harness.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace twr {

namespace {

std::string trimmed(std::string_view s) {
    const auto* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos)
        return {};
    return std::string(s.substr(b, s.find_last_not_of(ws) - b + 1));
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, ','))
        out.push_back(trimmed(field));
    if (!s.empty() && s.back() == ',')
        out.emplace_back();
    return out;
}

ScriptedRequest parse_request(const std::string& value, std::size_t line) {
    const auto f = split_csv(value);
    if (f.size() != 4 && f.size() != 5)
        throw ScenarioError("line " + std::to_string(line) +
                            ": request needs t_ms,app_id,service,OUTCOME[,REASON]");
    ScriptedRequest r;
    try {
        std::size_t used = 0;
        r.request.t = std::stoll(f[0], &used);
        if (used != f[0].size() || r.request.t < 0)
            throw std::invalid_argument("bad timestamp");
        r.request.app_id = f[1];
        r.request.service = f[2];
        r.expected = parse_outcome(f[3]);
        if (f.size() == 5)
            r.expected_reason = parse_reason(f[4]);
    } catch (const std::exception& e) {
        throw ScenarioError("line " + std::to_string(line) + ": " + e.what());
    }
    if (r.request.app_id.empty() || r.request.service.empty())
        throw ScenarioError("line " + std::to_string(line) + ": empty app id or service");
    return r;
}

void check_within(const char* what, Millis first, Millis last, Millis t) {
    if (t < first || t > last)
        throw std::invalid_argument(std::string("request at ") + std::to_string(t) + " ms lies outside the " + what +
                                    " stream [" + std::to_string(first) + ", " + std::to_string(last) + "]");
}

} // namespace

void Scenario::validate() const {
    for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto t = requests[i].request.t;
        if (i > 0 && t < requests[i - 1].request.t)
            throw std::invalid_argument("requests must be in time order");
        if (accel)
            check_within("accelerometer", accel->front().t, accel->back().t, t);
        if (prox)
            check_within("proximity", (*prox)[0].t, (*prox)[prox->size() - 1].t, t);
    }
}

Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir) {
    Scenario s;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto text = trimmed(raw);
        if (text.empty() || text.front() == '#')
            continue;
        const auto colon = text.find(':');
        if (colon == std::string::npos)
            throw ScenarioError("line " + std::to_string(line) + ": expected 'key: value'");
        const auto key = trimmed(std::string_view(text).substr(0, colon));
        const auto value = trimmed(std::string_view(text).substr(colon + 1));
        try {
            if (key == "label")
                s.label = value;
            else if (key == "accel")
                s.accel = load_accel_trace((base_dir / value).string());
            else if (key == "prox")
                s.prox = load_prox_trace((base_dir / value).string());
            else if (key == "request")
                s.requests.push_back(parse_request(value, line));
            else
                throw ScenarioError("line " + std::to_string(line) + ": unknown key '" + key + "'");
        } catch (const TraceError& e) {
            throw ScenarioError("line " + std::to_string(line) + ": " + e.what());
        }
    }
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(std::string("malformed scenario: ") + e.what());
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ScenarioError("cannot open scenario file '" + path.string() + "'");
    return parse_scenario(in, path.parent_path());
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
    s.validate();
    const auto dir = path.parent_path();
    const auto stem = path.stem().string();
    std::ostringstream out;
    out << "# twr scenario\n";
    if (!s.label.empty())
        out << "label: " << s.label << '\n';
    if (s.accel) {
        const auto name = stem + ".accel.csv";
        save_accel_trace(*s.accel, (dir / name).string());
        out << "accel: " << name << '\n';
    }
    if (s.prox) {
        const auto name = stem + ".prox.csv";
        save_prox_trace(*s.prox, (dir / name).string());
        out << "prox: " << name << '\n';
    }
    for (const auto& r : s.requests) {
        out << "request: " << r.request.t << ',' << r.request.app_id << ',' << r.request.service << ','
            << to_string(r.expected);
        if (r.expected_reason)
            out << ',' << to_string(*r.expected_reason);
        out << '\n';
    }
    std::ofstream file(path, std::ios::trunc);
    if (!file)
        throw ScenarioError("cannot write scenario file '" + path.string() + "'");
    file << out.str();
    if (!file)
        throw ScenarioError("failed writing scenario file '" + path.string() + "'");
}

std::string ScenarioResult::format_log() const {
    std::string out;
    for (const auto& rec : log)
        out += format_decision_line(rec) + "\n";
    return out;
}

ScenarioResult run_scenario(const Scenario& s, const GestureDatabase& db, const ProxConfig& cfg, double epsilon_cm,
                            const EngineOptions& opts) {
    s.validate();
    PermissionEngine engine(db, cfg, opts);
    const auto changes = s.prox ? detect_changes(*s.prox, epsilon_cm) : std::vector<Millis>{};
    const SensorContext sensors{s.accel ? &*s.accel : nullptr};

    ScenarioResult result;
    std::size_t next_change = 0;
    for (const auto& r : s.requests) {
        while (next_change < changes.size() && changes[next_change] <= r.request.t)
            engine.on_prox_change(changes[next_change++]);
        const auto d = engine.handle(r.request, sensors);
        if (d.outcome != r.expected || (r.expected_reason && d.reason != *r.expected_reason))
            result.mismatches.push_back(engine.log().size() - 1);
    }
    result.log = engine.log();

    // Per service: how many requests went through.
    auto& report = result.report;
    report.title = "Scenario replay (forward rate per service)";
    const std::string column = s.label.empty() ? "scenario" : s.label;
    report.columns.push_back(column);
    for (const auto& r : s.requests)
        if (std::find(report.rows.begin(), report.rows.end(), r.request.service) == report.rows.end())
            report.rows.push_back(r.request.service);
    for (const auto& service : report.rows) {
        std::size_t forwarded = 0, total = 0;
        bool expects_forward = false;
        for (std::size_t i = 0; i < s.requests.size(); ++i) {
            if (s.requests[i].request.service != service)
                continue;
            ++total;
            if (result.log[i].decision.outcome == Outcome::Forward)
                ++forwarded;
            if (s.requests[i].expected == Outcome::Forward)
                expects_forward = true;
        }
        report.cells.push_back(make_cell(service, column, forwarded, total, expects_forward));
    }
    return result;
}

namespace {

constexpr std::uint64_t kScenarioStream = 900;

ProxTrace flat_prox(Millis duration) {
    return ProxTrace({{0, kProxFar}, {duration, kProxFar}}, "idle");
}

} // namespace

Scenario make_pickpocket_scenario(const GenParams& p) {
    Scenario s;
    s.label = "pickpocket";
    GenParams q = p;
    q.rng_seed = derive_seed(p.rng_seed, kScenarioStream, 1);
    s.accel = gen_rest_stream(60000, q);
    s.prox = flat_prox(60000);
    for (Millis t = 500; t <= 60000; t += 500)
        s.requests.push_back({{"com.example.skimmer", "nfc", t}, Outcome::Reject, Reason::NoGesture});
    return s;
}

Scenario make_legit_nfc_scenario(const GenParams& p) {
    Scenario s;
    s.label = "legit-nfc";
    GenParams rest = p;
    rest.rng_seed = derive_seed(p.rng_seed, kScenarioStream, 2);
    GenParams tap = p;
    tap.taps_per_window = 1;
    tap.rng_seed = derive_seed(p.rng_seed, kScenarioStream, 3);

    const auto background = gen_rest_stream(10000, rest);
    const auto gesture = gen_tap_trace(tap);
    std::vector<AccelSample> samples(background.samples().begin(), background.samples().end());
    // Overwrite the samples leading up to t = 5000 with the tap, keeping the
    // recording's own timestamps.
    const auto end_it = std::upper_bound(samples.begin(), samples.end(), Millis{5000},
                                         [](Millis t, const AccelSample& a) { return t < a.t; });
    const auto end = static_cast<std::size_t>(end_it - samples.begin());
    for (std::size_t k = 0; k < gesture.size(); ++k) {
        auto& dst = samples[end - gesture.size() + k];
        const auto& src = gesture[k];
        dst = {dst.t, src.ax, src.ay, src.az};
    }
    s.accel = AccelTrace(std::move(samples), "legit-nfc");
    s.requests = {
        {{"com.example.wallet", "nfc", 5000}, Outcome::Forward, Reason::GestureMatched},
        {{"com.example.wallet", "nfc", 9000}, Outcome::Reject, Reason::NoGesture},
        {{"com.example.weather", "location", 9500}, Outcome::Forward, Reason::Unprotected},
    };
    return s;
}

Scenario make_legit_sms_scenario(const GenParams& /*p*/) {
    Scenario s;
    s.label = "legit-sms";
    // Seven transitions 150 ms apart from t = 3000: the sixth (3750) opens
    // [3750, 4750) and the seventh (3900) extends it to 4900.
    std::vector<ProxSample> samples = {{0, kProxFar}};
    double v = kProxFar;
    for (Millis t = 3000; t <= 3900; t += 150) {
        v = v == kProxFar ? kProxNear : kProxFar;
        samples.push_back({t, v});
    }
    samples.push_back({8000, v});
    s.prox = ProxTrace(std::move(samples), "wave");
    s.requests = {
        {{"com.example.messenger", "sms", 2000}, Outcome::Reject, Reason::NoGesture},
        {{"com.example.messenger", "sms", 4200}, Outcome::Forward, Reason::WithinUnlockWindow},
        {{"com.example.messenger", "sms", 6000}, Outcome::Reject, Reason::NoGesture},
    };
    return s;
}

GestureDatabase make_demo_database(const GenParams& p, std::size_t n, AxisRule rule) {
    GenParams q = p;
    q.taps_per_window = 1;
    GestureDatabase db;
    db.create_template("tap-once", tap_corpus(q, 30, 100 + 1), n, rule);
    db.register_policy({"nfc", ProtectionKind::UserDependentTap, "tap-once", 2000});
    db.register_policy({"sms", ProtectionKind::UserIndependentProx, std::nullopt, 2000});
    db.register_policy({"location", ProtectionKind::Unprotected, std::nullopt, 2000});
    return db;
}

} // namespace twr
