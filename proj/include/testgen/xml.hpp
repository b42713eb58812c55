#pragma once

// Minimal XML reader for the Clover report subset: elements, attributes,
// self-closing tags, XML declarations, comments, CDATA. Text content is
// discarded; entity references are decoded in attribute values.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace testgen {

struct XmlError : std::runtime_error {
    size_t position;
    XmlError(const std::string& msg, size_t pos)
        : std::runtime_error(msg + " at byte " + std::to_string(pos)), position(pos) {}
};

struct XmlNode {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<XmlNode> children;

    const std::string* attr(std::string_view key) const {
        for (const auto& [k, v] : attrs) {
            if (k == key) return &v;
        }
        return nullptr;
    }
};

namespace detail {

inline std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        auto try_sub = [&](std::string_view ent, char c) {
            if (s.compare(i, ent.size(), ent) == 0) {
                out.push_back(c);
                i += ent.size() - 1;
                return true;
            }
            return false;
        };
        if (try_sub("&amp;", '&') || try_sub("&lt;", '<') || try_sub("&gt;", '>') ||
            try_sub("&quot;", '"') || try_sub("&apos;", '\'')) {
            continue;
        }
        out.push_back(s[i]);
    }
    return out;
}

class XmlReader {
public:
    explicit XmlReader(std::string_view text) : text_(text) {}

    XmlNode parse() {
        skip_misc();
        if (pos_ >= text_.size() || text_[pos_] != '<') {
            throw XmlError("expected root element", pos_);
        }
        XmlNode root = parse_element();
        skip_misc();
        return root;
    }

private:
    std::string_view text_;
    size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    void skip_misc() {
        while (true) {
            skip_ws();
            if (text_.compare(pos_, 4, "<!--") == 0) {
                size_t end = text_.find("-->", pos_ + 4);
                if (end == std::string_view::npos) throw XmlError("unterminated comment", pos_);
                pos_ = end + 3;
                continue;
            }
            if (text_.compare(pos_, 2, "<?") == 0) {
                size_t end = text_.find("?>", pos_ + 2);
                if (end == std::string_view::npos) throw XmlError("unterminated declaration", pos_);
                pos_ = end + 2;
                continue;
            }
            if (text_.compare(pos_, 2, "<!") == 0) {  // DOCTYPE etc.
                size_t end = text_.find('>', pos_ + 2);
                if (end == std::string_view::npos) throw XmlError("unterminated directive", pos_);
                pos_ = end + 1;
                continue;
            }
            return;
        }
    }

    std::string parse_name() {
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                text_[pos_] == '-' || text_[pos_] == ':' || text_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ == start) throw XmlError("expected name", pos_);
        return std::string(text_.substr(start, pos_ - start));
    }

    XmlNode parse_element() {
        ++pos_;  // '<'
        XmlNode node;
        node.name = parse_name();
        while (true) {
            skip_ws();
            if (pos_ >= text_.size()) throw XmlError("unterminated element", pos_);
            if (text_[pos_] == '/') {
                if (pos_ + 1 >= text_.size() || text_[pos_ + 1] != '>') {
                    throw XmlError("malformed self-closing tag", pos_);
                }
                pos_ += 2;
                return node;
            }
            if (text_[pos_] == '>') {
                ++pos_;
                parse_children(node);
                return node;
            }
            std::string key = parse_name();
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != '=') throw XmlError("expected '='", pos_);
            ++pos_;
            skip_ws();
            if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\'')) {
                throw XmlError("expected quoted attribute value", pos_);
            }
            char quote = text_[pos_++];
            size_t vstart = pos_;
            while (pos_ < text_.size() && text_[pos_] != quote) ++pos_;
            if (pos_ >= text_.size()) throw XmlError("unterminated attribute value", vstart);
            node.attrs.emplace_back(std::move(key),
                                    decode_entities(text_.substr(vstart, pos_ - vstart)));
            ++pos_;  // closing quote
        }
    }

    void parse_children(XmlNode& node) {
        while (true) {
            // Skip text content up to the next markup.
            while (pos_ < text_.size() && text_[pos_] != '<') ++pos_;
            if (pos_ >= text_.size()) throw XmlError("unterminated element: " + node.name, pos_);
            if (text_.compare(pos_, 4, "<!--") == 0) {
                size_t end = text_.find("-->", pos_ + 4);
                if (end == std::string_view::npos) throw XmlError("unterminated comment", pos_);
                pos_ = end + 3;
                continue;
            }
            if (text_.compare(pos_, 9, "<![CDATA[") == 0) {
                size_t end = text_.find("]]>", pos_ + 9);
                if (end == std::string_view::npos) throw XmlError("unterminated CDATA", pos_);
                pos_ = end + 3;
                continue;
            }
            if (text_.compare(pos_, 2, "</") == 0) {
                pos_ += 2;
                std::string closing = parse_name();
                skip_ws();
                if (closing != node.name) {
                    throw XmlError("mismatched closing tag: " + closing, pos_);
                }
                if (pos_ >= text_.size() || text_[pos_] != '>') throw XmlError("expected '>'", pos_);
                ++pos_;
                return;
            }
            node.children.push_back(parse_element());
        }
    }
};

}  // namespace detail

inline XmlNode parse_xml(std::string_view text) { return detail::XmlReader(text).parse(); }

}  // namespace testgen
