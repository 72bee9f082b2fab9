#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "glickformer/errors.hpp"

// Position replay for puzzle solutions. Moves come from trusted solution
// lines, so there is no legality checking here -- only faithful execution of
// move effects: captures, castling rook transfer, en-passant removal,
// promotion, clock and castling-right updates.
namespace glick::chess {

enum class Color : std::uint8_t { white = 0, black = 1 };

inline Color other(Color c) {
  return c == Color::white ? Color::black : Color::white;
}

enum class PieceKind : std::uint8_t {
  king = 0,
  queen = 1,
  rook = 2,
  bishop = 3,
  knight = 4,
  pawn = 5,
};

struct Piece {
  PieceKind kind;
  Color color;
  bool operator==(const Piece&) const = default;
};

// a1 = 0, b1 = 1, ..., h8 = 63. file = index % 8, rank = index / 8.
struct Square {
  int index = 0;

  int file() const { return index % 8; }
  int rank() const { return index / 8; }

  static Square at(int file, int rank) { return Square{rank * 8 + file}; }

  static Square from_name(std::string_view name) {
    if (name.size() != 2 || name[0] < 'a' || name[0] > 'h' || name[1] < '1' ||
        name[1] > '8') {
      throw ParseError("square: bad name '" + std::string(name) + "'");
    }
    return at(name[0] - 'a', name[1] - '1');
  }

  std::string name() const {
    return {static_cast<char>('a' + file()), static_cast<char>('1' + rank())};
  }

  bool operator==(const Square&) const = default;
};

struct Move {
  Square from;
  Square to;
  std::optional<PieceKind> promotion;

  bool operator==(const Move&) const = default;
};

inline char piece_char(Piece p) {
  static constexpr char white_chars[] = {'K', 'Q', 'R', 'B', 'N', 'P'};
  char c = white_chars[static_cast<int>(p.kind)];
  return p.color == Color::white ? c : static_cast<char>(std::tolower(c));
}

inline std::optional<Piece> piece_from_char(char c) {
  Color color = std::isupper(static_cast<unsigned char>(c)) ? Color::white
                                                            : Color::black;
  switch (std::tolower(static_cast<unsigned char>(c))) {
    case 'k': return Piece{PieceKind::king, color};
    case 'q': return Piece{PieceKind::queen, color};
    case 'r': return Piece{PieceKind::rook, color};
    case 'b': return Piece{PieceKind::bishop, color};
    case 'n': return Piece{PieceKind::knight, color};
    case 'p': return Piece{PieceKind::pawn, color};
    default: return std::nullopt;
  }
}

struct BoardState {
  // 0 = empty, otherwise 1 + kind + 6*color.
  std::array<std::int8_t, 64> squares{};
  Color side_to_move = Color::white;
  // K, Q, k, q
  std::array<bool, 4> castling{false, false, false, false};
  std::optional<Square> en_passant;
  int halfmove_clock = 0;
  int fullmove_number = 1;

  std::optional<Piece> piece_at(Square s) const {
    std::int8_t v = squares[s.index];
    if (v == 0) return std::nullopt;
    v -= 1;
    return Piece{static_cast<PieceKind>(v % 6), static_cast<Color>(v / 6)};
  }

  void set_piece(Square s, std::optional<Piece> p) {
    squares[s.index] =
        p ? static_cast<std::int8_t>(1 + static_cast<int>(p->kind) +
                                     6 * static_cast<int>(p->color))
          : std::int8_t{0};
  }

  int piece_count() const {
    int n = 0;
    for (auto v : squares) n += (v != 0);
    return n;
  }

  bool operator==(const BoardState&) const = default;
};

// ---------------------------------------------------------------------------
// FEN
// ---------------------------------------------------------------------------

/// Parses a 4-6 field FEN string. Missing clock fields default to 0 and 1.
/// Throws ParseError naming the offending field.
inline BoardState parse_fen(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string placement, side, castling, ep, half, full;
  if (!(in >> placement >> side >> castling >> ep)) {
    throw ParseError("fen: expected at least 4 space-separated fields");
  }
  in >> half >> full;

  BoardState b;
  int rank = 7, file = 0;
  int kings[2] = {0, 0};
  for (char c : placement) {
    if (c == '/') {
      if (file != 8) throw ParseError("fen: piece placement: rank width != 8");
      if (rank == 0) throw ParseError("fen: piece placement: too many ranks");
      --rank;
      file = 0;
    } else if (c >= '1' && c <= '9') {
      file += c - '0';
      if (file > 8) throw ParseError("fen: piece placement: rank width > 8");
    } else {
      auto p = piece_from_char(c);
      if (!p) {
        throw ParseError(std::string("fen: piece placement: bad symbol '") +
                         c + "'");
      }
      if (file >= 8) throw ParseError("fen: piece placement: rank width > 8");
      Square s = Square::at(file, rank);
      if (p->kind == PieceKind::pawn && (rank == 0 || rank == 7)) {
        throw ParseError("fen: piece placement: pawn on back rank");
      }
      if (p->kind == PieceKind::king) {
        if (++kings[static_cast<int>(p->color)] > 1) {
          throw ParseError("fen: piece placement: two kings of one color");
        }
      }
      b.set_piece(s, *p);
      ++file;
    }
  }
  if (file != 8 || rank != 0) {
    throw ParseError("fen: piece placement: rank width != 8");
  }
  if (kings[0] != 1 || kings[1] != 1) {
    throw ParseError("fen: piece placement: missing king");
  }

  if (side == "w") {
    b.side_to_move = Color::white;
  } else if (side == "b") {
    b.side_to_move = Color::black;
  } else {
    throw ParseError("fen: side to move: illegal token '" + side + "'");
  }

  if (castling != "-") {
    for (char c : castling) {
      switch (c) {
        case 'K': b.castling[0] = true; break;
        case 'Q': b.castling[1] = true; break;
        case 'k': b.castling[2] = true; break;
        case 'q': b.castling[3] = true; break;
        default:
          throw ParseError(std::string("fen: castling: bad symbol '") + c +
                           "'");
      }
    }
  }

  if (ep != "-") {
    Square s = [&] {
      try {
        return Square::from_name(ep);
      } catch (const ParseError&) {
        throw ParseError("fen: en passant: bad square '" + ep + "'");
      }
    }();
    if (s.rank() != 2 && s.rank() != 5) {
      throw ParseError("fen: en passant: square not on rank 3 or 6");
    }
    b.en_passant = s;
  }

  auto parse_int = [](const std::string& s, const char* field) {
    try {
      size_t pos = 0;
      int v = std::stoi(s, &pos);
      if (pos != s.size() || v < 0) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ParseError(std::string("fen: ") + field + ": bad integer '" + s +
                       "'");
    }
  };
  b.halfmove_clock = half.empty() ? 0 : parse_int(half, "halfmove clock");
  b.fullmove_number = full.empty() ? 1 : parse_int(full, "fullmove number");
  return b;
}

inline std::string serialize_fen(const BoardState& b) {
  std::string out;
  for (int rank = 7; rank >= 0; --rank) {
    int empties = 0;
    for (int file = 0; file < 8; ++file) {
      auto p = b.piece_at(Square::at(file, rank));
      if (!p) {
        ++empties;
        continue;
      }
      if (empties) out += static_cast<char>('0' + empties);
      empties = 0;
      out += piece_char(*p);
    }
    if (empties) out += static_cast<char>('0' + empties);
    if (rank) out += '/';
  }
  out += b.side_to_move == Color::white ? " w " : " b ";
  std::string rights;
  static constexpr char right_chars[] = {'K', 'Q', 'k', 'q'};
  for (int i = 0; i < 4; ++i) {
    if (b.castling[i]) rights += right_chars[i];
  }
  out += rights.empty() ? "-" : rights;
  out += ' ';
  out += b.en_passant ? b.en_passant->name() : "-";
  out += ' ';
  out += std::to_string(b.halfmove_clock);
  out += ' ';
  out += std::to_string(b.fullmove_number);
  return out;
}

// ---------------------------------------------------------------------------
// UCI moves
// ---------------------------------------------------------------------------

inline Move parse_uci(std::string_view text) {
  if (text.size() != 4 && text.size() != 5) {
    throw ParseError("uci: bad move '" + std::string(text) + "'");
  }
  Move m;
  m.from = Square::from_name(text.substr(0, 2));
  m.to = Square::from_name(text.substr(2, 2));
  if (m.from == m.to) {
    throw ParseError("uci: null move '" + std::string(text) + "'");
  }
  if (text.size() == 5) {
    switch (text[4]) {
      case 'q': m.promotion = PieceKind::queen; break;
      case 'r': m.promotion = PieceKind::rook; break;
      case 'b': m.promotion = PieceKind::bishop; break;
      case 'n': m.promotion = PieceKind::knight; break;
      default:
        throw ParseError("uci: bad promotion in '" + std::string(text) + "'");
    }
  }
  return m;
}

inline std::string to_uci(const Move& m) {
  std::string s = m.from.name() + m.to.name();
  if (m.promotion) {
    static constexpr char promo_chars[] = {'?', 'q', 'r', 'b', 'n', '?'};
    s += promo_chars[static_cast<int>(*m.promotion)];
  }
  return s;
}

// ---------------------------------------------------------------------------
// Move application
// ---------------------------------------------------------------------------

/// Executes a trusted solution move and returns the resulting state.
/// Handles castling rook transfer, en-passant capture, promotion, castling
/// right revocation and both clocks. Throws DataError if the from-square is
/// empty or holds a piece of the wrong color.
inline BoardState apply_move(const BoardState& state, const Move& mv) {
  auto moved = state.piece_at(mv.from);
  if (!moved) {
    throw DataError("apply_move: from-square " + mv.from.name() + " is empty");
  }
  if (moved->color != state.side_to_move) {
    throw DataError("apply_move: piece on " + mv.from.name() +
                    " does not belong to the side to move");
  }

  BoardState next = state;
  next.en_passant.reset();

  bool is_pawn = moved->kind == PieceKind::pawn;
  bool is_capture = state.piece_at(mv.to).has_value();

  // En-passant capture: pawn moves diagonally onto the en-passant square.
  if (is_pawn && state.en_passant && mv.to == *state.en_passant &&
      mv.from.file() != mv.to.file() && !is_capture) {
    Square victim = Square::at(mv.to.file(), mv.from.rank());
    next.set_piece(victim, std::nullopt);
    is_capture = true;
  }

  next.set_piece(mv.from, std::nullopt);
  if (mv.promotion) {
    if (!is_pawn || (mv.to.rank() != 0 && mv.to.rank() != 7)) {
      throw DataError("apply_move: promotion on non-promoting move " +
                      to_uci(mv));
    }
    next.set_piece(mv.to, Piece{*mv.promotion, moved->color});
  } else {
    if (is_pawn && (mv.to.rank() == 0 || mv.to.rank() == 7)) {
      throw DataError("apply_move: pawn reached last rank without promotion");
    }
    next.set_piece(mv.to, *moved);
  }

  // Castling: king moves two files; transfer the rook.
  if (moved->kind == PieceKind::king && mv.from.file() == 4 &&
      std::abs(mv.to.file() - mv.from.file()) == 2) {
    int rank = mv.from.rank();
    bool kingside = mv.to.file() == 6;
    Square rook_from = Square::at(kingside ? 7 : 0, rank);
    Square rook_to = Square::at(kingside ? 5 : 3, rank);
    next.set_piece(rook_to, Piece{PieceKind::rook, moved->color});
    next.set_piece(rook_from, std::nullopt);
  }

  // Double pawn push opens an en-passant square behind the pawn.
  if (is_pawn && std::abs(mv.to.rank() - mv.from.rank()) == 2) {
    next.en_passant = Square::at(mv.from.file(), (mv.from.rank() + mv.to.rank()) / 2);
  }

  // Castling rights: king moves clear both; rook moves or captures on the
  // corner squares clear one.
  auto clear_right_for_corner = [&next](Square s) {
    if (s.index == 7) next.castling[0] = false;   // h1
    if (s.index == 0) next.castling[1] = false;   // a1
    if (s.index == 63) next.castling[2] = false;  // h8
    if (s.index == 56) next.castling[3] = false;  // a8
  };
  if (moved->kind == PieceKind::king) {
    if (moved->color == Color::white) {
      next.castling[0] = next.castling[1] = false;
    } else {
      next.castling[2] = next.castling[3] = false;
    }
  }
  clear_right_for_corner(mv.from);
  clear_right_for_corner(mv.to);

  next.halfmove_clock = (is_pawn || is_capture) ? 0 : state.halfmove_clock + 1;
  if (state.side_to_move == Color::black) {
    next.fullmove_number = state.fullmove_number + 1;
  }
  next.side_to_move = other(state.side_to_move);
  return next;
}

// ---------------------------------------------------------------------------
// Mirroring (solver-perspective normalization)
// ---------------------------------------------------------------------------

/// Flips ranks (rank r <-> 7-r, files unchanged), swaps every piece's color,
/// the side to move, and the color pair of the castling rights. Involution.
inline BoardState mirror(const BoardState& state) {
  BoardState out = state;
  for (int rank = 0; rank < 8; ++rank) {
    for (int file = 0; file < 8; ++file) {
      auto p = state.piece_at(Square::at(file, rank));
      if (p) p->color = other(p->color);
      out.set_piece(Square::at(file, 7 - rank), p);
    }
  }
  out.side_to_move = other(state.side_to_move);
  out.castling = {state.castling[2], state.castling[3], state.castling[0],
                  state.castling[1]};
  if (state.en_passant) {
    out.en_passant =
        Square::at(state.en_passant->file(), 7 - state.en_passant->rank());
  }
  return out;
}

inline Square mirror_square(Square s) {
  return Square::at(s.file(), 7 - s.rank());
}

inline Move mirror_move(const Move& mv) {
  return Move{mirror_square(mv.from), mirror_square(mv.to), mv.promotion};
}

inline BoardState start_position() {
  return parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1");
}

}  // namespace glick::chess
