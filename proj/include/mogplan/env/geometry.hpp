#pragma once

namespace mogplan::env {

struct Size {
  int width = 1920;
  int height = 1080;

  bool operator==(const Size&) const = default;
};

/// Integer pixel coordinate, origin at the top-left of the screen.
struct Point {
  int x = 0;
  int y = 0;

  bool operator==(const Point&) const = default;
};

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  int right() const { return x + width; }
  int bottom() const { return y + height; }

  // Half-open: the right and bottom edges are outside the rectangle.
  bool contains(Point p) const { return p.x >= x && p.x < right() && p.y >= y && p.y < bottom(); }

  Point center() const { return {x + width / 2, y + height / 2}; }
  Point top_left() const { return {x, y}; }
  // Last pixel inside the rectangle.
  Point bottom_right() const { return {right() - 1, bottom() - 1}; }

  bool within(Size screen) const {
    return x >= 0 && y >= 0 && width >= 0 && height >= 0 && right() <= screen.width &&
           bottom() <= screen.height;
  }

  bool operator==(const Rect&) const = default;
};

inline bool in_screen(Point p, Size screen) {
  return p.x >= 0 && p.y >= 0 && p.x < screen.width && p.y < screen.height;
}

}  // namespace mogplan::env
