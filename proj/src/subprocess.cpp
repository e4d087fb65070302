#include "trailforge/subprocess.hpp"

#include "trailforge/errors.hpp"

#include <fmt/core.h>

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace trailforge {

namespace {

struct Pipe {
    int rd = -1;
    int wr = -1;
    Pipe() {
        int fds[2];
        if (pipe(fds) != 0) fail(errc::io, fmt::format("pipe: {}", strerror(errno)));
        rd = fds[0];
        wr = fds[1];
    }
    ~Pipe() {
        if (rd >= 0) close(rd);
        if (wr >= 0) close(wr);
    }
    int take_rd() { int f = rd; rd = -1; return f; }
    int take_wr() { int f = wr; wr = -1; return f; }
};

void set_cloexec(int fd) { fcntl(fd, F_SETFD, FD_CLOEXEC); }

std::vector<char*> make_argv(const std::vector<std::string>& argv) {
    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    return cargv;
}

int spawn(const std::vector<std::string>& argv, int in_fd, int out_fd, int err_fd) {
    if (argv.empty()) fail(errc::invalid_argument, "empty argv");
    int pid = fork();
    if (pid < 0) fail(errc::io, fmt::format("fork: {}", strerror(errno)));
    if (pid == 0) {
        if (in_fd >= 0) dup2(in_fd, 0);
        if (out_fd >= 0) dup2(out_fd, 1);
        if (err_fd >= 0) dup2(err_fd, 2);
        auto cargv = make_argv(argv);
        execvp(cargv[0], cargv.data());
        fprintf(stderr, "exec %s: %s\n", cargv[0], strerror(errno));
        _exit(127);
    }
    return pid;
}

void append_capped(std::string& dst, const char* data, size_t n, size_t cap) {
    dst.append(data, n);
    if (dst.size() > cap) dst.erase(0, dst.size() - cap);  // keep the tail
}

} // namespace

CommandResult run_command(const std::vector<std::string>& argv, const CommandOptions& opts) {
    Pipe in_pipe, out_pipe, err_pipe;

    const bool want_stdin = opts.stdin_data.has_value() || opts.stdin_provider;

    int pid = spawn(argv, want_stdin ? in_pipe.rd : -1, out_pipe.wr, err_pipe.wr);
    // Parent keeps: child-stdin writer, child-stdout/stderr readers.
    close(in_pipe.take_rd());
    close(out_pipe.take_wr());
    close(err_pipe.take_wr());

    int in_fd = -1;
    if (want_stdin) in_fd = in_pipe.take_wr();
    else close(in_pipe.take_wr());
    int out_fd = out_pipe.take_rd();
    int err_fd = err_pipe.take_rd();
    if (in_fd >= 0) {
        fcntl(in_fd, F_SETFL, O_NONBLOCK);
        signal(SIGPIPE, SIG_IGN);
    }

    CommandResult result;
    std::string pending;  // bytes queued for the child's stdin
    size_t pending_off = 0;
    bool stdin_eof = !want_stdin;
    if (opts.stdin_data) pending = *opts.stdin_data;
    bool provider_done = !opts.stdin_provider;

    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(static_cast<long>(opts.timeout_s * 1000));
    bool timed_out = false;

    char buf[65536];
    while (out_fd >= 0 || err_fd >= 0 || !stdin_eof) {
        struct pollfd fds[3];
        int nfds = 0;
        int out_idx = -1, err_idx = -1, in_idx = -1;
        if (out_fd >= 0) { out_idx = nfds; fds[nfds++] = {out_fd, POLLIN, 0}; }
        if (err_fd >= 0) { err_idx = nfds; fds[nfds++] = {err_fd, POLLIN, 0}; }
        if (!stdin_eof) {
            if (pending_off >= pending.size() && !provider_done) {
                pending.clear();
                pending_off = 0;
                std::string chunk;
                if (opts.stdin_provider(chunk)) {
                    pending = std::move(chunk);
                } else {
                    provider_done = true;
                }
            }
            if (pending_off < pending.size()) {
                in_idx = nfds;
                fds[nfds++] = {in_fd, POLLOUT, 0};
            } else if (provider_done) {
                close(in_fd);
                in_fd = -1;
                stdin_eof = true;
            }
        }
        if (nfds == 0) break;

        int timeout_ms = -1;
        if (opts.timeout_s > 0) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                            deadline - std::chrono::steady_clock::now())
                            .count();
            if (left <= 0) { timed_out = true; break; }
            timeout_ms = static_cast<int>(left);
        }
        int rc = poll(fds, nfds, timeout_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            fail(errc::io, fmt::format("poll: {}", strerror(errno)));
        }
        if (rc == 0) { timed_out = true; break; }

        if (out_idx >= 0 && (fds[out_idx].revents & (POLLIN | POLLHUP))) {
            ssize_t n = read(out_fd, buf, sizeof buf);
            if (n > 0) {
                if (opts.stdout_sink) opts.stdout_sink(buf, static_cast<size_t>(n));
                else result.out.append(buf, static_cast<size_t>(n));
            } else {
                close(out_fd);
                out_fd = -1;
            }
        }
        if (err_idx >= 0 && (fds[err_idx].revents & (POLLIN | POLLHUP))) {
            ssize_t n = read(err_fd, buf, sizeof buf);
            if (n > 0) append_capped(result.err, buf, static_cast<size_t>(n), opts.err_limit);
            else { close(err_fd); err_fd = -1; }
        }
        if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
            if (fds[in_idx].revents & (POLLERR | POLLHUP)) {
                close(in_fd);
                in_fd = -1;
                stdin_eof = true;  // child stopped reading; not an error by itself
                provider_done = true;
            } else {
                ssize_t n = write(in_fd, pending.data() + pending_off, pending.size() - pending_off);
                if (n > 0) pending_off += static_cast<size_t>(n);
                else if (n < 0 && errno != EAGAIN && errno != EINTR) {
                    close(in_fd);
                    in_fd = -1;
                    stdin_eof = true;
                    provider_done = true;
                }
            }
        }
    }

    if (in_fd >= 0) close(in_fd);
    if (out_fd >= 0) close(out_fd);
    if (err_fd >= 0) close(err_fd);

    if (timed_out) {
        kill(pid, SIGKILL);
        waitpid(pid, nullptr, 0);
        fail(errc::io, fmt::format("command timed out after {}s: {}", opts.timeout_s,
                                   shell_split_describe(argv)));
    }

    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
    return result;
}

LineProcess::LineProcess(const std::vector<std::string>& argv) {
    Pipe in_pipe, out_pipe;
    pid_ = spawn(argv, in_pipe.rd, out_pipe.wr, -1);
    in_fd_ = in_pipe.take_wr();
    out_fd_ = out_pipe.take_rd();
    set_cloexec(in_fd_);
    set_cloexec(out_fd_);
    signal(SIGPIPE, SIG_IGN);
}

LineProcess::~LineProcess() { terminate(); }

LineProcess::LineProcess(LineProcess&& other) noexcept { *this = std::move(other); }

LineProcess& LineProcess::operator=(LineProcess&& other) noexcept {
    if (this != &other) {
        terminate();
        pid_ = other.pid_;
        in_fd_ = other.in_fd_;
        out_fd_ = other.out_fd_;
        buffer_ = std::move(other.buffer_);
        other.pid_ = -1;
        other.in_fd_ = other.out_fd_ = -1;
    }
    return *this;
}

bool LineProcess::running() const {
    if (pid_ < 0) return false;
    return waitpid(pid_, nullptr, WNOHANG) == 0;
}

void LineProcess::send_line(const std::string& line) {
    if (in_fd_ < 0) fail(errc::io, "adapter process stdin closed");
    std::string data = line;
    data.push_back('\n');
    size_t off = 0;
    while (off < data.size()) {
        ssize_t n = write(in_fd_, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail(errc::io, fmt::format("write to adapter: {}", strerror(errno)));
        }
        off += static_cast<size_t>(n);
    }
}

std::optional<std::string> LineProcess::recv_line(double timeout_s) {
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(static_cast<long>(timeout_s * 1000));
    for (;;) {
        auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        if (out_fd_ < 0) return std::nullopt;
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                        deadline - std::chrono::steady_clock::now())
                        .count();
        if (left <= 0) return std::nullopt;
        struct pollfd pfd{out_fd_, POLLIN, 0};
        int rc = poll(&pfd, 1, static_cast<int>(left));
        if (rc < 0) {
            if (errno == EINTR) continue;
            return std::nullopt;
        }
        if (rc == 0) return std::nullopt;
        char buf[16384];
        ssize_t n = read(out_fd_, buf, sizeof buf);
        if (n <= 0) {
            close(out_fd_);
            out_fd_ = -1;
            continue;  // drain any buffered line, then report EOF
        }
        buffer_.append(buf, static_cast<size_t>(n));
    }
}

void LineProcess::close_fds() {
    if (in_fd_ >= 0) close(in_fd_);
    if (out_fd_ >= 0) close(out_fd_);
    in_fd_ = out_fd_ = -1;
}

void LineProcess::terminate() {
    if (pid_ < 0) return;
    close_fds();
    // Closing stdin asks the child to exit; escalate if it lingers.
    for (int i = 0; i < 50; ++i) {
        if (waitpid(pid_, nullptr, WNOHANG) != 0) { pid_ = -1; return; }
        usleep(10000);
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
    pid_ = -1;
}

std::string shell_split_describe(const std::vector<std::string>& argv) {
    std::string s;
    for (const auto& a : argv) {
        if (!s.empty()) s.push_back(' ');
        if (a.find(' ') != std::string::npos) s += "'" + a + "'";
        else s += a;
    }
    return s;
}

std::vector<std::string> split_command(const std::string& command) {
    std::vector<std::string> out;
    std::string cur;
    bool in_single = false, in_double = false, has_token = false;
    for (char c : command) {
        if (in_single) {
            if (c == '\'') in_single = false;
            else cur.push_back(c);
        } else if (in_double) {
            if (c == '"') in_double = false;
            else cur.push_back(c);
        } else if (c == '\'') {
            in_single = true;
            has_token = true;
        } else if (c == '"') {
            in_double = true;
            has_token = true;
        } else if (c == ' ' || c == '\t') {
            if (has_token || !cur.empty()) {
                out.push_back(cur);
                cur.clear();
                has_token = false;
            }
        } else {
            cur.push_back(c);
        }
    }
    if (has_token || !cur.empty()) out.push_back(cur);
    return out;
}

} // namespace trailforge
