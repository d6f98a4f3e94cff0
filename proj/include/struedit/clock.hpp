#pragma once

#include <chrono>

namespace struedit {

// Seconds-valued time source. Stage latencies subtract two now() readings,
// so only differences are meaningful.
class Clock {
public:
    virtual ~Clock() = default;
    virtual double now() = 0;
};

class SteadyClock final : public Clock {
public:
    double now() override {
        auto t = std::chrono::steady_clock::now().time_since_epoch();
        return std::chrono::duration<double>(t).count();
    }
};

// Advances a fixed tick per reading. Durations then depend only on the call
// sequence, which makes scripted-oracle reports byte-for-byte reproducible.
class SimulatedClock final : public Clock {
public:
    explicit SimulatedClock(double tick_seconds = 1e-3) : tick_(tick_seconds) {}

    double now() override {
        current_ += tick_;
        return current_;
    }

private:
    double tick_;
    double current_ = 0.0;
};

inline Clock& steady_clock() {
    static SteadyClock instance;
    return instance;
}

}  // namespace struedit
