#include "hmp/types.hpp"

namespace hmp {

FaceLabel FaceLabel::flipped(int p) const {
    FaceLabel out;
    for (int i = 0; i < p; ++i) {
        const Sign s = (*this)[i];
        out.set(i, s == Sign::Plus ? Sign::Minus : s == Sign::Minus ? Sign::Plus : Sign::Zero);
    }
    return out;
}

int FaceLabel::support(int p) const {
    int n = 0;
    for (int i = 0; i < p; ++i) n += (*this)[i] != Sign::Zero;
    return n;
}

int CompositePrimitive::moving(int p) const {
    int n = 0;
    for (int i = 0; i < p; ++i) n += (*this)[i] != Tag::Hold;
    return n;
}

char to_char(Tag t) {
    switch (t) {
        case Tag::Hold: return 'H';
        case Tag::Forward: return 'F';
        case Tag::Backward: return 'B';
    }
    return '?';
}

char to_char(Sign s) {
    switch (s) {
        case Sign::Zero: return '0';
        case Sign::Plus: return '+';
        case Sign::Minus: return '-';
    }
    return '?';
}

std::string to_string(FaceLabel label, int p) {
    std::string s(static_cast<std::size_t>(p), '0');
    for (int i = 0; i < p; ++i) s[static_cast<std::size_t>(i)] = to_char(label[i]);
    return s;
}

std::string to_string(CompositePrimitive prim, int p) {
    std::string s(static_cast<std::size_t>(p), 'H');
    for (int i = 0; i < p; ++i) s[static_cast<std::size_t>(i)] = to_char(prim[i]);
    return s;
}

FaceLabel parse_label(std::string_view text) {
    if (text.empty() || text.size() > kMaxOutputs)
        throw Error(ErrorKind::Parse, "bad face label '" + std::string(text) + "'");
    FaceLabel out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        switch (text[i]) {
            case '0': break;
            case '+': out.set(static_cast<int>(i), Sign::Plus); break;
            case '-': out.set(static_cast<int>(i), Sign::Minus); break;
            default: throw Error(ErrorKind::Parse, "bad face label '" + std::string(text) + "'");
        }
    }
    return out;
}

CompositePrimitive parse_primitive(std::string_view text) {
    if (text.empty() || text.size() > kMaxOutputs)
        throw Error(ErrorKind::Parse, "bad primitive '" + std::string(text) + "'");
    CompositePrimitive out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        switch (text[i]) {
            case 'H': break;
            case 'F': out.set(static_cast<int>(i), Tag::Forward); break;
            case 'B': out.set(static_cast<int>(i), Tag::Backward); break;
            default: throw Error(ErrorKind::Parse, "bad primitive '" + std::string(text) + "'");
        }
    }
    return out;
}

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Semantic: return "semantic error";
        case ErrorKind::EmptyWorkspace: return "empty workspace";
        case ErrorKind::UnreachableGoal: return "unreachable goal";
        case ErrorKind::Contract: return "contract violation";
        case ErrorKind::NumericFailure: return "numeric failure";
        case ErrorKind::Stuck: return "stuck";
        case ErrorKind::Safety: return "safety violation";
        case ErrorKind::HashMismatch: return "hash mismatch";
        case ErrorKind::Io: return "io error";
    }
    return "error";
}

}  // namespace hmp
