#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace trailforge {

struct CommandResult {
    int exit_code = -1;
    std::string out;  // captured stdout unless a sink was given
    std::string err;  // captured stderr (tail-truncated at err_limit)
};

struct CommandOptions {
    // Fixed stdin payload, fed then closed. Mutually exclusive with stdin_provider.
    std::optional<std::string> stdin_data;
    // Streaming stdin: called repeatedly to refill `chunk`; return false at EOF.
    // Lets callers pipe gigabytes of raw frames without staging them on disk.
    std::function<bool(std::string& chunk)> stdin_provider;
    // Streaming stdout consumer; when set, CommandResult::out stays empty.
    std::function<void(const char* data, size_t n)> stdout_sink;
    size_t err_limit = 64 * 1024;
    double timeout_s = 0;  // 0 = no timeout; on expiry the child is killed
};

// Spawn argv[0] with the given arguments (no shell). Throws errc::io when the
// binary cannot be spawned; a nonzero exit is reported via exit_code, not an
// exception.
CommandResult run_command(const std::vector<std::string>& argv, const CommandOptions& opts = {});

// Bidirectional line-oriented child process (newline-delimited protocols).
class LineProcess {
public:
    LineProcess() = default;
    explicit LineProcess(const std::vector<std::string>& argv);
    ~LineProcess();

    LineProcess(const LineProcess&) = delete;
    LineProcess& operator=(const LineProcess&) = delete;
    LineProcess(LineProcess&& other) noexcept;
    LineProcess& operator=(LineProcess&& other) noexcept;

    bool running() const;
    void send_line(const std::string& line);
    // Blocks up to timeout_s; nullopt on EOF/timeout/child exit.
    std::optional<std::string> recv_line(double timeout_s);
    void terminate();

private:
    void close_fds();

    int pid_ = -1;
    int in_fd_ = -1;   // child's stdin (we write)
    int out_fd_ = -1;  // child's stdout (we read)
    std::string buffer_;
};

std::string shell_split_describe(const std::vector<std::string>& argv);

// Split a command string into argv honoring single/double quotes (adapter
// manifest addresses are command lines, not shell scripts).
std::vector<std::string> split_command(const std::string& command);

} // namespace trailforge
