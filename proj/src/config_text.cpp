#include "bbgky/config_text.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace bbgky {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

// Drops a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view line)
{
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"')
            quoted = !quoted;
        else if (line[i] == '#' && !quoted)
            return line.substr(0, i);
    }
    return line;
}

bool valid_key(std::string_view key)
{
    if (key.empty())
        return false;
    for (char c : key) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
            return false;
    }
    return true;
}

class ValueParser {
public:
    ValueParser(std::string_view text, int line)
        : text_(text)
        , line_(line)
    {
    }

    Json parse()
    {
        Json v = value();
        skip_space();
        if (pos_ != text_.size())
            fail("trailing characters after value");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw ConfigError("line " + std::to_string(line_) + ": " + what);
    }

    void skip_space()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    Json value()
    {
        skip_space();
        if (pos_ >= text_.size())
            fail("missing value");
        const char c = text_[pos_];
        if (c == '"')
            return string();
        if (c == '[')
            return array();
        if (text_.substr(pos_, 4) == "true") {
            pos_ += 4;
            return true;
        }
        if (text_.substr(pos_, 5) == "false") {
            pos_ += 5;
            return false;
        }
        return number();
    }

    Json string()
    {
        ++pos_;
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
                ++pos_;
                const char e = text_[pos_];
                out += e == 'n' ? '\n' : (e == 't' ? '\t' : e);
            } else {
                out += text_[pos_];
            }
            ++pos_;
        }
        if (pos_ >= text_.size())
            fail("unterminated string");
        ++pos_;
        return out;
    }

    Json array()
    {
        ++pos_;
        Json out = Json::array();
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return out;
        }
        for (;;) {
            out.push_back(value());
            skip_space();
            if (pos_ >= text_.size())
                fail("unterminated array");
            if (text_[pos_] == ',') {
                ++pos_;
                skip_space();
                if (pos_ < text_.size() && text_[pos_] == ']') {
                    ++pos_;
                    return out;
                }
                continue;
            }
            if (text_[pos_] == ']') {
                ++pos_;
                return out;
            }
            fail("expected ',' or ']' in array");
        }
    }

    Json number()
    {
        std::size_t end = pos_;
        while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '.'
                                         || text_[end] == '+' || text_[end] == '-' || text_[end] == '_'))
            ++end;
        std::string token;
        for (char c : text_.substr(pos_, end - pos_))
            if (c != '_')
                token += c;
        if (token.empty())
            fail("unrecognised value");
        pos_ = end;
        const bool integral = token.find_first_of(".eEn") == std::string::npos;
        try {
            std::size_t used = 0;
            if (integral) {
                const long long v = std::stoll(token, &used);
                if (used == token.size())
                    return v;
            } else {
                const double v = std::stod(token, &used);
                if (used == token.size())
                    return v;
            }
        } catch (const std::exception&) {
        }
        fail("malformed number '" + token + "'");
    }

    std::string_view text_;
    int line_;
    std::size_t pos_ = 0;
};

Json& section_at(Json& root, std::string_view header, int line)
{
    Json* node = &root;
    while (!header.empty()) {
        const auto dot = header.find('.');
        const std::string_view part = trim(header.substr(0, dot));
        if (!valid_key(part))
            throw ConfigError("line " + std::to_string(line) + ": bad section name");
        Json& child = (*node)[std::string(part)];
        if (child.is_null())
            child = Json::object();
        if (!child.is_object())
            throw ConfigError("line " + std::to_string(line) + ": section clashes with a key");
        node = &child;
        header = dot == std::string_view::npos ? std::string_view{} : header.substr(dot + 1);
    }
    return *node;
}

void emit_value(std::ostream& out, const Json& v)
{
    if (v.is_array()) {
        out << '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i)
                out << ", ";
            emit_value(out, v[i]);
        }
        out << ']';
    } else {
        out << v.dump();
    }
}

void emit_table(std::ostream& out, const Json& table, const std::string& prefix)
{
    for (const auto& [key, value] : table.items()) {
        if (!value.is_object()) {
            out << key << " = ";
            emit_value(out, value);
            out << '\n';
        }
    }
    for (const auto& [key, value] : table.items()) {
        if (value.is_object()) {
            const std::string name = prefix.empty() ? key : prefix + "." + key;
            out << "\n[" << name << "]\n";
            emit_table(out, value, name);
        }
    }
}

const Json& lookup(const Json& table, const std::string& key)
{
    if (!table.is_object() || !table.contains(key))
        throw ConfigError("missing key '" + key + "'");
    return table.at(key);
}

} // namespace

Json parse_config_text(std::string_view text)
{
    Json root = Json::object();
    Json* current = &root;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find('\n', start), text.size());
        ++line_no;
        const std::string_view line = trim(strip_comment(text.substr(start, end - start)));
        start = end + 1;
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            current = &section_at(root, line.substr(1, line.size() - 2), line_no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        if (!valid_key(key))
            throw ConfigError("line " + std::to_string(line_no) + ": bad key '" + key + "'");
        if (current->contains(key))
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        (*current)[key] = ValueParser(trim(line.substr(eq + 1)), line_no).parse();
    }
    return root;
}

Json read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config_text(buffer.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string to_config_text(const Json& table)
{
    std::ostringstream out;
    emit_table(out, table, "");
    return out.str();
}

double get_number(const Json& table, const std::string& key)
{
    const Json& v = lookup(table, key);
    if (!v.is_number())
        throw ConfigError("key '" + key + "' must be a number");
    return v.get<double>();
}

double get_number(const Json& table, const std::string& key, double fallback)
{
    return table.is_object() && table.contains(key) ? get_number(table, key) : fallback;
}

std::int64_t get_integer(const Json& table, const std::string& key)
{
    const Json& v = lookup(table, key);
    if (!v.is_number_integer())
        throw ConfigError("key '" + key + "' must be an integer");
    return v.get<std::int64_t>();
}

std::int64_t get_integer(const Json& table, const std::string& key, std::int64_t fallback)
{
    return table.is_object() && table.contains(key) ? get_integer(table, key) : fallback;
}

std::string get_string(const Json& table, const std::string& key)
{
    const Json& v = lookup(table, key);
    if (!v.is_string())
        throw ConfigError("key '" + key + "' must be a string");
    return v.get<std::string>();
}

std::string get_string(const Json& table, const std::string& key, const std::string& fallback)
{
    return table.is_object() && table.contains(key) ? get_string(table, key) : fallback;
}

const Json& get_table(const Json& table, const std::string& key)
{
    const Json& v = lookup(table, key);
    if (!v.is_object())
        throw ConfigError("'" + key + "' must be a section");
    return v;
}

} // namespace bbgky
