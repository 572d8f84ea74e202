#include "icdm/dataset/encoder.hpp"

#include "icdm/core/error.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace icdm::dataset {

std::string format_reward(double reward)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", reward);
    std::string out(buf);
    if (out == "-0.00") {
        out = "0.00";
    }
    return out;
}

SerializedTrajectory encode(const Trajectory& trajectory)
{
    std::string text;
    for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
        const auto& step = trajectory.steps[i];
        const auto k = std::to_string(i + 1);
        if (i > 0) {
            text += ", ";
        }
        text += "<O_" + k + "> " + std::to_string(step.obs) + ", <A_" + k + "> " + std::to_string(step.action) +
                ", <R_" + k + "> " + format_reward(step.reward);
    }
    return {std::move(text), kSchemaVersion};
}

namespace {

class Parser {
public:
    Parser(std::string_view text, std::size_t base) : text_(text), base_(base) {}

    bool done() const { return pos_ >= text_.size(); }
    std::size_t offset() const { return base_ + pos_; }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, offset()); }

    void expect(std::string_view literal)
    {
        if (text_.substr(pos_, literal.size()) != literal) {
            fail("expected '" + std::string(literal) + "'");
        }
        pos_ += literal.size();
    }

    bool peek(std::string_view literal) const { return text_.substr(pos_, literal.size()) == literal; }

    /// "0" or [1-9][0-9]*, fitting in int.
    int natural()
    {
        const auto start = pos_;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
            ++pos_;
        }
        if (pos_ == start) {
            pos_ = start;
            fail("expected a decimal integer");
        }
        if (text_[start] == '0' && pos_ - start > 1) {
            pos_ = start;
            fail("leading zero in integer");
        }
        int value = 0;
        const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (ec != std::errc() || ptr != text_.data() + pos_) {
            pos_ = start;
            fail("integer out of range");
        }
        return value;
    }

    double reward()
    {
        const auto start = pos_;
        if (peek("-")) {
            ++pos_;
        }
        natural();
        expect(".");
        for (int d = 0; d < 2; ++d) {
            if (pos_ >= text_.size() || text_[pos_] < '0' || text_[pos_] > '9') {
                fail("reward needs exactly two decimals");
            }
            ++pos_;
        }
        const std::string token(text_.substr(start, pos_ - start));
        const double value = std::strtod(token.c_str(), nullptr);
        if (format_reward(value) != token) {
            pos_ = start;
            fail("reward '" + token + "' is not in canonical form");
        }
        return value;
    }

    void tag(char field, std::size_t index)
    {
        expect(std::string("<") + field + "_");
        const auto at = pos_;
        const int k = natural();
        if (static_cast<std::size_t>(k) != index) {
            pos_ = at;
            fail("expected step number " + std::to_string(index));
        }
        expect("> ");
    }

private:
    std::string_view text_;
    std::size_t base_;
    std::size_t pos_ = 0;
};

Trajectory decode_at(std::string_view text, std::size_t base)
{
    Trajectory out;
    Parser p(text, base);
    for (std::size_t k = 1; !p.done(); ++k) {
        if (k > 1) {
            p.expect(", ");
        }
        Step step;
        p.tag('O', k);
        step.obs = p.natural();
        p.expect(", ");
        p.tag('A', k);
        step.action = p.natural();
        p.expect(", ");
        p.tag('R', k);
        step.reward = p.reward();
        out.steps.push_back(step);
    }
    return out;
}

} // namespace

Trajectory decode(std::string_view text) { return decode_at(text, 0); }

std::string encode_context(const std::vector<Trajectory>& trajectories)
{
    std::string out;
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        if (i > 0) {
            out += '\n';
        }
        out += "TRAJ " + std::to_string(i + 1) + ": " + encode(trajectories[i]).text;
    }
    return out;
}

std::vector<Trajectory> decode_context(std::string_view text)
{
    std::vector<Trajectory> out;
    if (text.empty()) {
        return out;
    }
    std::size_t start = 0;
    for (std::size_t k = 1;; ++k) {
        const auto end = text.find('\n', start);
        const auto line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        const auto prefix = "TRAJ " + std::to_string(k) + ": ";
        if (line.substr(0, prefix.size()) != prefix) {
            throw ParseError("expected '" + prefix + "'", start);
        }
        out.push_back(decode_at(line.substr(prefix.size()), start + prefix.size()));
        if (end == std::string_view::npos) {
            break;
        }
        start = end + 1;
    }
    return out;
}

} // namespace icdm::dataset
