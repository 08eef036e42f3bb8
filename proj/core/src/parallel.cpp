#include "mkg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace mkg {
namespace {

class Pool {
public:
    explicit Pool(int n) : size_(std::max(1, n)) {
        for (int w = 1; w < size_; ++w) {
            workers_.emplace_back([this, w] { loop(w); });
        }
    }

    ~Pool() {
        {
            std::lock_guard lock(mu_);
            stop_ = true;
            ++generation_;
        }
        cv_.notify_all();
        for (auto& t : workers_) t.join();
    }

    int size() const { return size_; }

    void run(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
        if (size_ == 1 || n < 2 || inside_) {
            body(0, n);
            return;
        }
        std::unique_lock lock(mu_);
        body_ = &body;
        n_ = n;
        pending_ = size_ - 1;
        ++generation_;
        lock.unlock();
        cv_.notify_all();
        execute(0);
        lock.lock();
        done_.wait(lock, [this] { return pending_ == 0; });
        body_ = nullptr;
        if (error_) std::rethrow_exception(std::exchange(error_, nullptr));
    }

private:
    void execute(int w) {
        std::size_t per = (n_ + size_ - 1) / size_;
        std::size_t b = std::min(n_, per * static_cast<std::size_t>(w));
        std::size_t e = std::min(n_, b + per);
        if (b >= e) return;
        inside_ = true;
        try {
            (*body_)(b, e);
        } catch (...) {
            std::lock_guard lock(error_mu_);
            if (!error_) error_ = std::current_exception();
        }
        inside_ = false;
    }

    void loop(int w) {
        std::uint64_t seen = 0;
        for (;;) {
            std::unique_lock lock(mu_);
            cv_.wait(lock, [&] { return generation_ != seen; });
            seen = generation_;
            if (stop_) return;
            lock.unlock();
            execute(w);
            lock.lock();
            if (--pending_ == 0) done_.notify_one();
        }
    }

    int size_;
    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable done_;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
    int pending_ = 0;
    std::size_t n_ = 0;
    const std::function<void(std::size_t, std::size_t)>* body_ = nullptr;
    std::mutex error_mu_;
    std::exception_ptr error_;
    static thread_local bool inside_;
};

thread_local bool Pool::inside_ = false;

std::unique_ptr<Pool>& pool() {
    static std::unique_ptr<Pool> p = std::make_unique<Pool>(1);
    return p;
}

double pairwise(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise(v, h) + pairwise(v + h, n - h);
}

constexpr std::size_t kBlock = 4096;

}  // namespace

void set_thread_count(int n) {
    if (n < 1) n = 1;
    if (pool()->size() != n) pool() = std::make_unique<Pool>(n);
}

int thread_count() { return pool()->size(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    pool()->run(n, body);
}

double deterministic_sum(std::span<const double> values) {
    std::size_t n = values.size();
    if (n == 0) return 0.0;
    std::size_t blocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(blocks);
    parallel_for(blocks, [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
            std::size_t lo = k * kBlock;
            std::size_t len = std::min(kBlock, n - lo);
            partial[k] = pairwise(values.data() + lo, len);
        }
    });
    return pairwise(partial.data(), blocks);
}

double deterministic_max(std::span<const double> values) {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

}  // namespace mkg
