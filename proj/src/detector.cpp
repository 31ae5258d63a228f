#include "disorder/detector.hpp"

#include <fmt/format.h>

#include "disorder/errors.hpp"
#include "disorder/likelihood.hpp"

namespace disorder {

Detector::Detector(const DisorderModel& model, const ThresholdTable& r_star, bool record_trace)
    : model_(&model),
      table_(&r_star),
      record_trace_(record_trace),
      ring_(static_cast<std::size_t>(model.window.d1) + 2),
      posterior_(initial_posterior(model)),
      scratch_(ring_.size()) {
    check_table_matches(model, r_star);
}

Decision Detector::push(State x) {
    if (stopped_at_) throw ContractError(fmt::format("detector already stopped at n = {}", *stopped_at_));
    if (x >= model_->num_states()) throw InputError(fmt::format("state index {} out of range", x));
    if (n_ < 0) {
        if (x != model_->x0) {
            throw ContractError(fmt::format("first observation must be x0 = '{}'", model_->label(model_->x0)));
        }
    } else {
        const State prev = ring_[(head_ + ring_.size() - 1) % ring_.size()];
        posterior_ = posterior_step(*model_, posterior_, prev, x);
    }
    ring_[head_] = x;
    head_ = (head_ + 1) % ring_.size();
    ++n_;

    TraceRecord record{n_, std::nullopt, std::nullopt, posterior_.pi_n};
    Decision decision = Decision::kContinue;
    const auto d1 = model_->window.d1;
    if (n_ >= d1 + 1) {
        // Oldest entry sits at head_ once the ring is full.
        for (std::size_t i = 0; i < ring_.size(); ++i) scratch_[i] = ring_[(head_ + i) % ring_.size()];
        const double g = detection_statistic_g(*model_, Window(scratch_, n_ - d1 - 1));
        const double r = table_->at(std::span<const State>(scratch_).subspan(1));
        record.g = g;
        record.r_star = r;
        if (g >= r) {
            stopped_at_ = n_;
            decision = Decision::kStop;
        }
    }
    if (record_trace_) trace_.push_back(record);
    return decision;
}

bool Detector::crosses(const DisorderModel& model, const ThresholdTable& r_star,
                       std::span<const State> prefix) {
    const auto len = static_cast<std::size_t>(model.window.d1) + 2;
    if (prefix.size() < len) return false;
    const auto window = prefix.last(len);
    const auto start = static_cast<std::int64_t>(prefix.size() - len);
    return detection_statistic_g(model, Window(window, start)) >= r_star.at(window.subspan(1));
}

bool is_success(const PrecisionWindow& window, std::uint64_t theta, std::int64_t tau) {
    const auto diff = static_cast<std::int64_t>(theta) - tau;
    return -window.d1 <= diff && diff <= window.d2;
}

DetectionReport run_to_decision(const DisorderModel& model, const ThresholdTable& r_star,
                                std::span<const State> observations,
                                std::optional<std::uint64_t> theta, bool record_trace) {
    Detector detector(model, r_star, record_trace);
    DetectionReport report;
    report.theta = theta;
    for (State x : observations) {
        ++report.observations;
        if (detector.push(x) == Decision::kStop) break;
    }
    report.stop_time = detector.stopped_at();
    report.undecided = !report.stop_time.has_value();
    if (theta) report.success = report.stop_time && is_success(model.window, *theta, *report.stop_time);
    report.trace = detector.trace();
    return report;
}

}  // namespace disorder
