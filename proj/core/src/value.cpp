#include "mashup/value.hpp"

#include <algorithm>

namespace mashup {

bool Collection::contains(const Value& v) const
{
    return std::find(items.begin(), items.end(), v) != items.end();
}

bool Collection::insert(Value v)
{
    if (is_unique(kind) && contains(v))
        return false;
    items.push_back(std::move(v));
    return true;
}

bool Collection::erase(const Value& v)
{
    auto it = std::find(items.begin(), items.end(), v);
    if (it == items.end())
        return false;
    items.erase(it);
    return true;
}

Collection make_collection(CollKind kind, std::vector<Value> items)
{
    Collection c{kind, {}};
    c.items.reserve(items.size());
    for (auto& v : items)
        c.insert(std::move(v));
    return c;
}

} // namespace mashup
