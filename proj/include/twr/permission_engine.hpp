#pragma once

#include "twr/prox_detector.hpp"
#include "twr/sensor_model.hpp"
#include "twr/tap_detector.hpp"

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace twr {

enum class ProtectionKind { UserDependentTap, UserIndependentProx, Unprotected };

std::string_view to_string(ProtectionKind kind) noexcept;
/// Accepts the snake_case names ("user_dependent_tap", ...) and the short
/// aliases "tap", "prox", "none".
ProtectionKind parse_protection_kind(std::string_view text);

struct GesturePolicy {
    std::string service;
    ProtectionKind kind = ProtectionKind::Unprotected;
    std::optional<std::string> template_id; // required for UserDependentTap
    Millis capture_window = 2000;

    friend bool operator==(const GesturePolicy&, const GesturePolicy&) = default;
};

class DatabaseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Services mapped to the gesture that guards them, plus the tap templates
/// those policies reference. Every mutation keeps referential integrity:
/// a tap policy always names a stored template.
class GestureDatabase {
public:
    static constexpr int kFormatVersion = 1;

    const std::map<std::string, GesturePolicy>& policies() const noexcept { return policies_; }
    const std::map<std::string, GestureTemplate>& templates() const noexcept { return templates_; }

    const GesturePolicy* find_policy(std::string_view service) const;
    const GestureTemplate* find_template(std::string_view id) const;

    /// Adds or replaces the policy for policy.service.
    void register_policy(GesturePolicy policy);
    /// Returns false when no policy existed.
    bool remove_policy(std::string_view service);

    /// Adds or replaces a template.
    void put_template(const std::string& id, GestureTemplate tmpl);
    /// build_template over the traces, stored under id.
    const GestureTemplate& create_template(const std::string& id, std::span<const AccelTrace> traces,
                                           std::size_t n, AxisRule rule);
    /// Returns false when absent; throws DatabaseError while a policy still uses it.
    bool remove_template(std::string_view id);

    friend bool operator==(const GestureDatabase&, const GestureDatabase&) = default;

private:
    std::map<std::string, GesturePolicy> policies_;
    std::map<std::string, GestureTemplate> templates_;
};

std::string serialize_db(const GestureDatabase& db);
GestureDatabase deserialize_db(std::string_view text);
GestureDatabase load_db(const std::string& path);
void save_db(const GestureDatabase& db, const std::string& path);

struct AccessRequest {
    std::string app_id;
    std::string service;
    Millis t = 0;
};

enum class Outcome { Forward, Reject };
enum class Reason { Unprotected, GestureMatched, WithinUnlockWindow, NoGesture, TemplateMissing };

std::string_view to_string(Outcome o) noexcept;
std::string_view to_string(Reason r) noexcept;
Outcome parse_outcome(std::string_view text);
Reason parse_reason(std::string_view text);

struct Decision {
    Outcome outcome = Outcome::Reject;
    Reason reason = Reason::NoGesture;
    std::optional<double> score; // best window score on the tap path

    static Decision forward(Reason why, std::optional<double> score = std::nullopt);
    static Decision reject(Reason why, std::optional<double> score = std::nullopt);

    friend bool operator==(const Decision&, const Decision&) = default;
};

/// What the gesture extractor can see. The accelerometer recording is not
/// owned and may be null when the device has no accelerometer data.
struct SensorContext {
    const AccelTrace* accel = nullptr;
};

struct EngineOptions {
    /// Also scan this many ms after the request (explicit-gesture prompting).
    Millis wait_forward_ms = 0;
    /// Scan stride in samples; defaults to a tenth of the template length.
    std::optional<std::size_t> stride;
};

/// Decision core once the policy and its template have been resolved.
/// `tmpl` may be null; a tap policy without a template rejects with
/// TemplateMissing.
Decision decide(const AccessRequest& req, const GesturePolicy* policy, const GestureTemplate* tmpl,
                const SensorContext& sensors, const ProxDetector& prox, const EngineOptions& opts = {});

Decision check_permission(const AccessRequest& req, const GestureDatabase& db, const SensorContext& sensors,
                          const ProxDetector& prox, const EngineOptions& opts = {});

struct DecisionRecord {
    AccessRequest request;
    Decision decision;
};

/// `t_ms,app_id,service,outcome,reason,score` with an empty score field when absent.
std::string format_decision_line(const DecisionRecord& rec);

/// One device: the shared proximity detector, the database it consults and
/// an append-only decision log. Requests and proximity changes must arrive
/// in non-decreasing time order.
class PermissionEngine {
public:
    PermissionEngine(const GestureDatabase& db, ProxConfig prox_cfg = {}, EngineOptions opts = {});

    std::optional<UnlockWindow> on_prox_change(Millis t);
    Decision handle(const AccessRequest& req, const SensorContext& sensors);

    const std::vector<DecisionRecord>& log() const noexcept { return log_; }
    const ProxDetector& prox() const noexcept { return prox_; }

private:
    const GestureDatabase& db_;
    ProxDetector prox_;
    EngineOptions opts_;
    std::vector<DecisionRecord> log_;
    std::optional<Millis> clock_;
};

} // namespace twr
