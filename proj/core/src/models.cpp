#include "relsim/models.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <string>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "relsim/errors.hpp"

namespace relsim {

ParameterSpace borehole_space() {
    ParameterSpace s;
    s.add("r_w", Normal{0.10, 0.0161812});
    s.add("r", Lognormal{7.71, 1.0056});
    s.add("T_u", Uniform{63070.0, 115600.0});
    s.add("H_u", Uniform{990.0, 1110.0});
    s.add("T_l", Uniform{63.1, 116.0});
    s.add("H_l", Uniform{700.0, 820.0});
    s.add("L", Uniform{1120.0, 1680.0});
    s.add("K_w", Uniform{9855.0, 12045.0});
    return s;
}

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_borehole_input(const InputSample& x) {
    if (x.values.size() != 8)
        throw EvaluationError("borehole: expected 8 inputs, got " +
                              std::to_string(x.values.size()));
    const double r_w = x.values[0], r = x.values[1];
    if (!(r_w > 0.0) || !(r > 0.0) || !(r / r_w > 0.0))
        throw EvaluationError("borehole: radius ratio r/r_w must be positive");
}
} // namespace

double borehole_flow(const InputSample& x) {
    check_borehole_input(x);
    const double r_w = x.values[0], r = x.values[1], T_u = x.values[2], H_u = x.values[3],
                 T_l = x.values[4], H_l = x.values[5], L = x.values[6], K_w = x.values[7];
    const double log_ratio = std::log(r / r_w);
    const double den =
        log_ratio * (1.0 + 2.0 * L * T_u / (log_ratio * r_w * r_w * K_w) + T_u / T_l);
    if (den == 0.0 || !std::isfinite(den))
        throw EvaluationError("borehole: degenerate denominator");
    return kTwoPi * T_u * (H_u - H_l) / den;
}

double borehole_flow_lf(const InputSample& x, double distortion) {
    check_borehole_input(x);
    const double r_w = x.values[0], r = x.values[1], T_u = x.values[2], H_u = x.values[3],
                 H_l = x.values[5], L = x.values[6], K_w = x.values[7];
    const double log_ratio = std::log(r / r_w) * (1.0 + distortion);
    const double den = log_ratio * (1.0 + 2.0 * L * T_u / (log_ratio * r_w * r_w * K_w));
    if (den == 0.0 || !std::isfinite(den))
        throw EvaluationError("borehole_lf: degenerate denominator");
    return kTwoPi * T_u * (H_u - H_l) / den;
}

std::unique_ptr<Evaluator> make_borehole(double threshold, double cost_seconds) {
    return std::make_unique<Evaluator>(
        "borehole",
        [threshold](const InputSample& x) { return borehole_flow(x) - threshold; },
        cost_seconds);
}

std::unique_ptr<Evaluator> make_borehole_lf(double distortion, double threshold,
                                            double cost_seconds) {
    return std::make_unique<Evaluator>(
        "borehole_lf",
        [distortion, threshold](const InputSample& x) {
            return borehole_flow_lf(x, distortion) - threshold;
        },
        cost_seconds);
}

ParameterSpace standard_normal_space(int dim) {
    if (dim < 1) throw std::invalid_argument("standard_normal_space: dim must be >= 1");
    ParameterSpace s;
    for (int d = 0; d < dim; ++d) s.add("x" + std::to_string(d + 1), Normal{0.0, 1.0});
    return s;
}

std::unique_ptr<Evaluator> make_linear(int dim, double beta0, double cost_seconds) {
    if (dim < 1) throw std::invalid_argument("make_linear: dim must be >= 1");
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(dim));
    return std::make_unique<Evaluator>(
        "linear",
        [dim, beta0, inv_sqrt_d](const InputSample& x) {
            if (static_cast<int>(x.values.size()) != dim)
                throw EvaluationError("linear: dimension mismatch");
            double s = 0.0;
            for (double v : x.values) s += v;
            return s * inv_sqrt_d - beta0;
        },
        cost_seconds);
}

// --- subprocess evaluator --------------------------------------------------

namespace {

// Bidirectional line pipe to a shell child. Lives in a shared_ptr captured by
// the evaluator's closure; destruction closes the pipes and reaps the child.
class LinePipe {
public:
    explicit LinePipe(std::string command) : command_(std::move(command)) {}

    ~LinePipe() {
        if (to_child_) std::fclose(to_child_);
        if (from_child_) std::fclose(from_child_);
        if (pid_ > 0) waitpid(pid_, nullptr, 0);
    }

    double round_trip(const std::string& line) {
        if (pid_ < 0) spawn();
        if (std::fputs(line.c_str(), to_child_) == EOF || std::fputc('\n', to_child_) == EOF ||
            std::fflush(to_child_) != 0)
            throw EvaluationError("subprocess '" + command_ + "': write failed");
        char buf[256];
        if (!std::fgets(buf, sizeof buf, from_child_))
            throw EvaluationError("subprocess '" + command_ + "': no output (process exited?)");
        char* end = nullptr;
        const double v = std::strtod(buf, &end);
        if (end == buf || !std::isfinite(v))
            throw EvaluationError("subprocess '" + command_ + "': unparseable output '" +
                                  std::string(buf) + "'");
        return v;
    }

private:
    void spawn() {
        int in_pipe[2], out_pipe[2];
        if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
            throw EvaluationError("subprocess: pipe() failed: " + std::string(strerror(errno)));
        pid_ = fork();
        if (pid_ < 0) throw EvaluationError("subprocess: fork() failed");
        if (pid_ == 0) {
            dup2(in_pipe[0], STDIN_FILENO);
            dup2(out_pipe[1], STDOUT_FILENO);
            close(in_pipe[0]);
            close(in_pipe[1]);
            close(out_pipe[0]);
            close(out_pipe[1]);
            execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(in_pipe[0]);
        close(out_pipe[1]);
        to_child_ = fdopen(in_pipe[1], "w");
        from_child_ = fdopen(out_pipe[0], "r");
        if (!to_child_ || !from_child_)
            throw EvaluationError("subprocess: fdopen() failed");
    }

    std::string command_;
    pid_t pid_ = -1;
    std::FILE* to_child_ = nullptr;
    std::FILE* from_child_ = nullptr;
};

} // namespace

std::unique_ptr<Evaluator> make_subprocess(std::string command, double cost_seconds) {
    auto pipe = std::make_shared<LinePipe>(command);
    return std::make_unique<Evaluator>(
        "subprocess:" + command,
        [pipe](const InputSample& x) {
            std::ostringstream line;
            line.precision(17);
            for (std::size_t i = 0; i < x.values.size(); ++i) {
                if (i) line << ' ';
                line << x.values[i];
            }
            return pipe->round_trip(line.str());
        },
        cost_seconds);
}

} // namespace relsim
