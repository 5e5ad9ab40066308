#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace notefeat {

struct XmlParseError : std::runtime_error {
    std::size_t offset;
    XmlParseError(std::string msg, std::size_t off)
        : std::runtime_error(std::move(msg)), offset(off) {}
};

struct XmlNode {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<XmlNode> children;
    std::string text; // concatenated character data directly inside this element

    const XmlNode* child(std::string_view child_name) const {
        for (const auto& c : children)
            if (c.name == child_name) return &c;
        return nullptr;
    }
    std::vector<const XmlNode*> all(std::string_view child_name) const {
        std::vector<const XmlNode*> out;
        for (const auto& c : children)
            if (c.name == child_name) out.push_back(&c);
        return out;
    }
    std::string_view attr(std::string_view key, std::string_view fallback = {}) const {
        for (const auto& [k, v] : attributes)
            if (k == key) return v;
        return fallback;
    }
    bool has(std::string_view child_name) const { return child(child_name) != nullptr; }
    // text of a direct child, or fallback when the child is absent
    std::string_view child_text(std::string_view child_name, std::string_view fallback = {}) const {
        const XmlNode* c = child(child_name);
        return c ? std::string_view(c->text) : fallback;
    }
};

// Small non-validating XML reader covering the constructs MusicXML uses:
// declaration, DOCTYPE, comments, CDATA, attributes, character entities.
// Namespace prefixes are kept verbatim. Throws XmlParseError.
class XmlParser {
public:
    static XmlNode parse(std::string_view doc) {
        XmlParser p(doc);
        return p.run();
    }

private:
    explicit XmlParser(std::string_view doc) : s_(doc) {}

    static constexpr std::size_t kMaxDepth = 256;

    XmlNode run() {
        XmlNode root;
        std::vector<XmlNode*> stack; // open elements; empty until root start tag
        bool have_root = false;
        bool root_closed = false;

        skip_misc();
        while (pos_ < s_.size()) {
            if (s_[pos_] != '<') {
                std::string text = read_text();
                if (!stack.empty()) append_text(*stack.back(), text);
                else if (!all_space(text)) err("character data outside the root element");
                continue;
            }
            if (starts_with("<!--")) { skip_comment(); continue; }
            if (starts_with("<![CDATA[")) {
                std::string data = read_cdata();
                if (stack.empty()) err("CDATA outside the root element");
                stack.back()->text += data;
                continue;
            }
            if (starts_with("<?")) { skip_pi(); continue; }
            if (starts_with("<!")) { skip_doctype(); continue; }
            if (starts_with("</")) {
                std::string name = read_end_tag();
                if (stack.empty()) err("unmatched end tag </" + name + ">");
                if (stack.back()->name != name)
                    err("mismatched end tag </" + name + ">, expected </" + stack.back()->name + ">");
                stack.pop_back();
                if (stack.empty()) { root_closed = true; skip_misc(); if (pos_ < s_.size()) err("content after the root element"); }
                continue;
            }
            // start tag
            bool self_closing = false;
            XmlNode node = read_start_tag(self_closing);
            if (!have_root) {
                if (root_closed) err("multiple root elements");
                root = std::move(node);
                have_root = true;
                if (!self_closing) stack.push_back(&root);
                else root_closed = true;
            } else {
                if (stack.empty()) err("multiple root elements");
                if (stack.size() >= kMaxDepth) err("nesting too deep");
                stack.back()->children.push_back(std::move(node));
                if (!self_closing) stack.push_back(&stack.back()->children.back());
            }
        }
        if (!have_root) err("no root element");
        if (!stack.empty()) err("unterminated element <" + stack.back()->name + ">");
        return root;
    }

    [[noreturn]] void err(const std::string& msg) const { throw XmlParseError(msg, pos_); }

    bool starts_with(std::string_view prefix) const {
        return s_.substr(pos_, prefix.size()) == prefix;
    }
    static bool all_space(std::string_view t) {
        for (char c : t)
            if (c != ' ' && c != '\t' && c != '\r' && c != '\n') return false;
        return true;
    }
    static void append_text(XmlNode& node, const std::string& text) {
        if (!all_space(text)) node.text += text;
    }
    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r' || s_[pos_] == '\n'))
            ++pos_;
    }
    void skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<?")) { skip_pi(); continue; }
            if (starts_with("<!--")) { skip_comment(); continue; }
            if (starts_with("<!")) { skip_doctype(); continue; }
            break;
        }
    }
    void skip_pi() {
        std::size_t end = s_.find("?>", pos_);
        if (end == std::string_view::npos) err("unterminated processing instruction");
        pos_ = end + 2;
    }
    void skip_comment() {
        std::size_t end = s_.find("-->", pos_ + 4);
        if (end == std::string_view::npos) err("unterminated comment");
        pos_ = end + 3;
    }
    void skip_doctype() {
        // <!DOCTYPE ...> possibly with an [ internal subset ]
        int depth = 0;
        for (std::size_t i = pos_; i < s_.size(); ++i) {
            if (s_[i] == '[') ++depth;
            else if (s_[i] == ']') --depth;
            else if (s_[i] == '>' && depth <= 0) { pos_ = i + 1; return; }
        }
        err("unterminated <! declaration");
    }
    std::string read_cdata() {
        std::size_t start = pos_ + 9;
        std::size_t end = s_.find("]]>", start);
        if (end == std::string_view::npos) err("unterminated CDATA section");
        std::string out(s_.substr(start, end - start));
        pos_ = end + 3;
        return out;
    }

    static bool name_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':' ||
               static_cast<unsigned char>(c) >= 0x80;
    }
    static bool name_char(char c) {
        return name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
    }

    std::string read_name() {
        if (pos_ >= s_.size() || !name_start(s_[pos_])) err("expected a name");
        std::size_t start = pos_;
        while (pos_ < s_.size() && name_char(s_[pos_])) ++pos_;
        return std::string(s_.substr(start, pos_ - start));
    }

    XmlNode read_start_tag(bool& self_closing) {
        ++pos_; // consume '<'
        XmlNode node;
        node.name = read_name();
        for (;;) {
            skip_ws();
            if (pos_ >= s_.size()) err("unterminated start tag");
            if (s_[pos_] == '>') { ++pos_; self_closing = false; return node; }
            if (s_[pos_] == '/') {
                if (pos_ + 1 >= s_.size() || s_[pos_ + 1] != '>') err("expected '/>'");
                pos_ += 2;
                self_closing = true;
                return node;
            }
            std::string key = read_name();
            skip_ws();
            if (pos_ >= s_.size() || s_[pos_] != '=') err("expected '=' after attribute name");
            ++pos_;
            skip_ws();
            if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\'')) err("expected a quoted attribute value");
            char quote = s_[pos_++];
            std::size_t start = pos_;
            while (pos_ < s_.size() && s_[pos_] != quote) ++pos_;
            if (pos_ >= s_.size()) err("unterminated attribute value");
            node.attributes.emplace_back(std::move(key), decode_entities(s_.substr(start, pos_ - start)));
            ++pos_;
        }
    }

    std::string read_end_tag() {
        pos_ += 2; // consume '</'
        std::string name = read_name();
        skip_ws();
        if (pos_ >= s_.size() || s_[pos_] != '>') err("malformed end tag");
        ++pos_;
        return name;
    }

    std::string read_text() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && s_[pos_] != '<') ++pos_;
        return decode_entities(s_.substr(start, pos_ - start));
    }

    std::string decode_entities(std::string_view raw) const {
        std::string out;
        out.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size();) {
            if (raw[i] != '&') { out.push_back(raw[i++]); continue; }
            std::size_t semi = raw.find(';', i + 1);
            if (semi == std::string_view::npos || semi - i > 12) { out.push_back(raw[i++]); continue; }
            std::string_view ent = raw.substr(i + 1, semi - i - 1);
            if (ent == "lt") out.push_back('<');
            else if (ent == "gt") out.push_back('>');
            else if (ent == "amp") out.push_back('&');
            else if (ent == "apos") out.push_back('\'');
            else if (ent == "quot") out.push_back('"');
            else if (!ent.empty() && ent[0] == '#') {
                long code = -1;
                try {
                    code = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                               ? std::stol(std::string(ent.substr(2)), nullptr, 16)
                               : std::stol(std::string(ent.substr(1)), nullptr, 10);
                } catch (...) { code = -1; }
                if (code < 0 || code > 0x10FFFF) { out.push_back(raw[i++]); continue; }
                append_codepoint(out, static_cast<char32_t>(code));
            } else {
                out.push_back(raw[i++]);
                continue;
            }
            i = semi + 1;
        }
        return out;
    }

    static void append_codepoint(std::string& out, char32_t cp) {
        if (cp < 0x80) out.push_back(static_cast<char>(cp));
        else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace notefeat
