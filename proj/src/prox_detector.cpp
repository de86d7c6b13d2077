#include "twr/prox_detector.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace twr {

void ProxConfig::validate() const {
    if (wind_sz < 2)
        throw std::invalid_argument("wind_sz must be at least 2");
    if (wave_time_limit <= 0)
        throw std::invalid_argument("wave_time_limit must be positive");
    if (unlock_time_frame <= 0)
        throw std::invalid_argument("unlock_time_frame must be positive");
}

ProxDetector::ProxDetector(ProxConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    change_times_.assign(cfg_.wind_sz, 0);
}

std::optional<UnlockWindow> ProxDetector::on_change(Millis t) {
    if (filled_ > 0) {
        const auto prev = change_times_[(index_ + cfg_.wind_sz - 1) % cfg_.wind_sz];
        if (t < prev)
            throw std::invalid_argument("proximity change at " + std::to_string(t) +
                                        " ms precedes previous change at " + std::to_string(prev) + " ms");
    }

    change_times_[index_] = t;
    ++filled_;
    const Millis time_diff = change_times_[index_] - change_times_[(index_ + 1) % cfg_.wind_sz];

    std::optional<UnlockWindow> opened;
    if (filled_ >= cfg_.wind_sz && time_diff < cfg_.wave_time_limit) {
        opened = UnlockWindow{t, t + cfg_.unlock_time_frame};
        if (unlocked_ && unlocked_->end >= t)
            unlocked_->end = opened->end;
        else
            unlocked_ = opened;
    }
    index_ = (index_ + 1) % cfg_.wind_sz;
    return opened;
}

bool ProxDetector::is_unlocked(Millis t) const noexcept {
    return unlocked_ && unlocked_->contains(t);
}

std::vector<Millis> detect_changes(const ProxTrace& trace, double epsilon_cm) {
    if (!(epsilon_cm >= 0.0))
        throw std::invalid_argument("epsilon must be non-negative");
    std::vector<Millis> out;
    const auto s = trace.samples();
    for (std::size_t i = 1; i < s.size(); ++i)
        if (std::fabs(s[i].value - s[i - 1].value) > epsilon_cm)
            out.push_back(s[i].t);
    return out;
}

std::vector<UnlockWindow> run_detector(const ProxTrace& trace, const ProxConfig& cfg, double epsilon_cm) {
    ProxDetector det(cfg);
    std::vector<UnlockWindow> out;
    for (const auto t : detect_changes(trace, epsilon_cm))
        if (auto w = det.on_change(t))
            out.push_back(*w);
    return out;
}

} // namespace twr
