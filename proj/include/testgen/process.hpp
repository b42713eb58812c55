#pragma once

// Child-process execution for command backends and compile/run adapters:
// /bin/sh -c <cmd>, stdin fed from a buffer, stdout/stderr captured, hard
// kill on timeout.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>
#include <string>
#include <string_view>

namespace testgen {

struct CommandResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string out;
    std::string err;
};

namespace detail {

inline void ignore_sigpipe_once() {
    static const bool done = [] {
        ::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)done;
}

inline void set_nonblocking(int fd) {
    int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

}  // namespace detail

inline CommandResult run_command(const std::string& shell_cmd, std::string_view stdin_data = {},
                                 double timeout_sec = 120.0) {
    detail::ignore_sigpipe_once();
    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) {
        throw std::runtime_error("pipe() failed: " + std::string(std::strerror(errno)));
    }
    pid_t pid = ::fork();
    if (pid < 0) {
        throw std::runtime_error("fork() failed: " + std::string(std::strerror(errno)));
    }
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_pipe[1], STDERR_FILENO);
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        ::close(err_pipe[0]);
        ::close(err_pipe[1]);
        ::execl("/bin/sh", "sh", "-c", shell_cmd.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    detail::set_nonblocking(in_pipe[1]);
    detail::set_nonblocking(out_pipe[0]);
    detail::set_nonblocking(err_pipe[0]);

    CommandResult result;
    size_t written = 0;
    bool stdin_open = true;
    bool stdout_open = true;
    bool stderr_open = true;
    if (stdin_data.empty()) {
        ::close(in_pipe[1]);
        stdin_open = false;
    }

    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::milliseconds(static_cast<long>(timeout_sec * 1000.0));
    char buf[4096];

    while (stdout_open || stderr_open || stdin_open) {
        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            ::kill(pid, SIGKILL);
            break;
        }
        long wait_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        if (wait_ms > 200) wait_ms = 200;

        struct pollfd fds[3];
        int nfds = 0;
        int idx_in = -1, idx_out = -1, idx_err = -1;
        if (stdin_open) {
            idx_in = nfds;
            fds[nfds++] = {in_pipe[1], POLLOUT, 0};
        }
        if (stdout_open) {
            idx_out = nfds;
            fds[nfds++] = {out_pipe[0], POLLIN, 0};
        }
        if (stderr_open) {
            idx_err = nfds;
            fds[nfds++] = {err_pipe[0], POLLIN, 0};
        }
        int rc = ::poll(fds, static_cast<nfds_t>(nfds), static_cast<int>(wait_ms));
        if (rc < 0 && errno != EINTR) {
            break;
        }
        if (idx_in >= 0 && (fds[idx_in].revents & (POLLOUT | POLLERR | POLLHUP))) {
            if (fds[idx_in].revents & (POLLERR | POLLHUP)) {
                ::close(in_pipe[1]);
                stdin_open = false;
            } else {
                ssize_t n = ::write(in_pipe[1], stdin_data.data() + written,
                                    stdin_data.size() - written);
                if (n > 0) {
                    written += static_cast<size_t>(n);
                }
                if ((n < 0 && errno != EAGAIN && errno != EINTR) || written == stdin_data.size()) {
                    ::close(in_pipe[1]);
                    stdin_open = false;
                }
            }
        }
        auto drain = [&buf](int fd, std::string& sink, bool& open_flag, short revents) {
            if (!(revents & (POLLIN | POLLHUP | POLLERR))) return;
            while (true) {
                ssize_t n = ::read(fd, buf, sizeof(buf));
                if (n > 0) {
                    sink.append(buf, static_cast<size_t>(n));
                    continue;
                }
                if (n == 0) {
                    ::close(fd);
                    open_flag = false;
                }
                break;
            }
        };
        if (idx_out >= 0) drain(out_pipe[0], result.out, stdout_open, fds[idx_out].revents);
        if (idx_err >= 0) drain(err_pipe[0], result.err, stderr_open, fds[idx_err].revents);
    }
    if (stdin_open) ::close(in_pipe[1]);
    if (stdout_open) ::close(out_pipe[0]);
    if (stderr_open) ::close(err_pipe[0]);

    int status = 0;
    ::waitpid(pid, &status, 0);
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    }
    return result;
}

}  // namespace testgen
