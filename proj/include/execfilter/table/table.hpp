#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "execfilter/denotation.hpp"
#include "execfilter/error.hpp"

namespace execfilter::table {

enum class CType : std::uint8_t { String, Number, Date };

inline const char* to_string(CType t) {
    switch (t) {
        case CType::String: return "string";
        case CType::Number: return "number";
        case CType::Date: return "date";
    }
    return "?";
}

inline CType ctype_from_string(const std::string& s) {
    if (s == "string") return CType::String;
    if (s == "number") return CType::Number;
    if (s == "date") return CType::Date;
    throw ParseError("unknown column type '" + s + "'");
}

struct Date {
    int y = 0, m = 0, d = 0;

    friend bool operator==(const Date& a, const Date& b) {
        return a.y == b.y && a.m == b.m && a.d == b.d;
    }
    friend bool operator<(const Date& a, const Date& b) {
        if (a.y != b.y) return a.y < b.y;
        if (a.m != b.m) return a.m < b.m;
        return a.d < b.d;
    }

    std::string iso() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
        return buf;
    }

    static Date parse(const std::string& s) {
        Date out;
        char tail = 0;
        if (std::sscanf(s.c_str(), "%d-%d-%d%c", &out.y, &out.m, &out.d, &tail) != 3)
            throw ParseError("bad date '" + s + "', expected YYYY-MM-DD");
        if (out.m < 1 || out.m > 12 || out.d < 1 || out.d > 31)
            throw ParseError("date out of range '" + s + "'");
        return out;
    }
};

// One table cell. Blank is a first-class state rather than a sentinel value.
class Cell {
  public:
    Cell() : v_(std::monostate{}) {}
    static Cell blank() { return Cell(); }
    static Cell str(std::string s) { return Cell(Value(std::move(s))); }
    static Cell num(double x) { return Cell(Value(x)); }
    static Cell date(Date d) { return Cell(Value(d)); }

    bool is_blank() const { return std::holds_alternative<std::monostate>(v_); }
    bool is_str() const { return std::holds_alternative<std::string>(v_); }
    bool is_num() const { return std::holds_alternative<double>(v_); }
    bool is_date() const { return std::holds_alternative<Date>(v_); }

    const std::string& as_str() const { return std::get<std::string>(v_); }
    double as_num() const { return std::get<double>(v_); }
    const Date& as_date() const { return std::get<Date>(v_); }

    // Non-blank cells denote values; dates surface as ISO strings since the
    // denotation algebra has no date tag.
    Denotation denotation() const {
        if (is_str()) return Denotation::str(as_str());
        if (is_num()) return Denotation::num(as_num());
        if (is_date()) return Denotation::str(as_date().iso());
        throw TypeCheckError("blank cell has no denotation");
    }

    friend bool operator==(const Cell& a, const Cell& b) {
        if (a.v_.index() != b.v_.index()) return false;
        if (a.is_blank()) return true;
        if (a.is_str()) return a.as_str() == b.as_str();
        if (a.is_num()) return num_equal(a.as_num(), b.as_num());
        return a.as_date() == b.as_date();
    }

  private:
    using Value = std::variant<std::monostate, std::string, double, Date>;
    explicit Cell(Value v) : v_(std::move(v)) {}
    Value v_;
};

struct Column {
    std::string name;
    CType ctype = CType::String;
};

struct Table {
    std::string table_id;
    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;

    void validate() const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            for (std::size_t j = i + 1; j < columns.size(); ++j) {
                if (columns[i].name == columns[j].name)
                    throw ParseError("duplicate column '" + columns[i].name + "' in table " +
                                     table_id);
            }
        }
        for (const auto& row : rows) {
            if (row.size() != columns.size())
                throw ParseError("row width mismatch in table " + table_id);
            for (std::size_t c = 0; c < row.size(); ++c) {
                const Cell& cell = row[c];
                if (cell.is_blank()) continue;
                bool ok = (columns[c].ctype == CType::String && cell.is_str()) ||
                          (columns[c].ctype == CType::Number && cell.is_num()) ||
                          (columns[c].ctype == CType::Date && cell.is_date());
                if (!ok)
                    throw ParseError("cell type does not match column '" + columns[c].name +
                                     "' in table " + table_id);
            }
        }
    }

    int column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i].name == name) return static_cast<int>(i);
        }
        return -1;
    }

    bool has_blanks() const {
        for (const auto& row : rows) {
            for (const auto& cell : row) {
                if (cell.is_blank()) return true;
            }
        }
        return false;
    }

    nlohmann::json to_json() const {
        nlohmann::json jcols = nlohmann::json::array();
        for (const auto& c : columns)
            jcols.push_back({{"name", c.name}, {"ctype", to_string(c.ctype)}});
        nlohmann::json jrows = nlohmann::json::array();
        for (const auto& row : rows) {
            nlohmann::json jrow = nlohmann::json::array();
            for (std::size_t c = 0; c < row.size(); ++c) {
                const Cell& cell = row[c];
                if (cell.is_blank())
                    jrow.push_back(nullptr);
                else if (cell.is_str())
                    jrow.push_back(cell.as_str());
                else if (cell.is_num())
                    jrow.push_back(cell.as_num());
                else
                    jrow.push_back(cell.as_date().iso());
            }
            jrows.push_back(std::move(jrow));
        }
        return {{"table_id", table_id}, {"columns", std::move(jcols)}, {"rows", std::move(jrows)}};
    }

    static Table from_json(const nlohmann::json& j) {
        Table t;
        t.table_id = j.at("table_id").get<std::string>();
        for (const auto& jc : j.at("columns")) {
            t.columns.push_back(Column{jc.at("name").get<std::string>(),
                                       ctype_from_string(jc.at("ctype").get<std::string>())});
        }
        for (const auto& jrow : j.at("rows")) {
            std::vector<Cell> row;
            std::size_t c = 0;
            for (const auto& jcell : jrow) {
                if (c >= t.columns.size())
                    throw ParseError("row wider than header in table " + t.table_id);
                row.push_back(cell_from_json(jcell, t.columns[c].ctype));
                ++c;
            }
            t.rows.push_back(std::move(row));
        }
        t.validate();
        return t;
    }

    static Cell cell_from_json(const nlohmann::json& j, CType ctype) {
        if (j.is_null()) return Cell::blank();
        switch (ctype) {
            case CType::String:
                if (!j.is_string()) throw ParseError("string column holds a non-string cell");
                return Cell::str(j.get<std::string>());
            case CType::Number:
                if (!j.is_number()) throw ParseError("number column holds a non-number cell");
                return Cell::num(j.get<double>());
            case CType::Date:
                if (!j.is_string()) throw ParseError("date column holds a non-string cell");
                return Cell::date(Date::parse(j.get<std::string>()));
        }
        throw ParseError("unreachable column type");
    }
};

}  // namespace execfilter::table
