"""Reference transfer-function series for the four-state (5,7) code."""

FOUR_STREAM = {
    5: "a^2 b^2 d + b c^2 d^2",
    6: "2 a^2 b c^2 d + a^2 b^2 d^2 + b^2 c^2 d^2",
    7: "a^2 b^3 c^2 + 2 a^2 b^2 c^2 d + 2 a^2 b c^2 d^2 + b^3 c^2 d^2 + a^2 b^2 d^3 + a^2 c^2 d^3",
    8: "a^4 b^2 c^2 + 4 a^2 b^3 c^2 d + 4 a^2 b^2 c^2 d^2 + b^4 c^2 d^2 + a^2 c^4 d^2"
       " + 4 a^2 b c^2 d^3 + a^2 b^2 d^4",
}

TWO_STREAM = {
    5: "a^2 b^3",
    6: "a^4 b^2 + a^2 b^4",
    7: "3 a^4 b^3 + a^2 b^5",
    8: "a^6 b^2 + 6 a^4 b^4 + a^2 b^6",
    9: "5 a^6 b^3 + 10 a^4 b^5 + a^2 b^7",
    10: "a^8 b^2 + 15 a^6 b^4 + 15 a^4 b^6 + a^2 b^8",
}

THREE_STREAM = {
    5: "a^2 b^2 c + a^2 b c^2 + a b^2 c^2",
    6: "a^3 b^2 c + a^2 b^3 c + a^3 b c^2 + a b^3 c^2 + a^2 b c^3 + a b^2 c^3",
    7: "2 a^3 b^3 c + 2 a^3 b^2 c^2 + 2 a^2 b^3 c^2 + 2 a^3 b c^3 + 2 a^2 b^2 c^3 + 2 a b^3 c^3",
    8: "a^5 b^3 + a^4 b^3 c + a^3 b^4 c + 2 a^4 b^2 c^2 + 3 a^3 b^3 c^2 + 2 a^2 b^4 c^2"
       " + a^4 b c^3 + 3 a^3 b^2 c^3 + 3 a^2 b^3 c^3 + a b^4 c^3 + b^5 c^3 + a^3 b c^4"
       " + 2 a^2 b^2 c^4 + a b^3 c^4 + a^3 c^5",
}

THREE_STREAM_BLOCK = {
    5: "a^5 + a^3 b^2 + a^2 b^3 + b^5 + a^3 c^2 + b^3 c^2 + a^2 c^3 + b^2 c^3 + c^5",
    6: "a^4 b^2 + 3 a^3 b^3 + a^2 b^4 + a^4 c^2 + 3 a^2 b^2 c^2 + b^4 c^2 + 3 a^3 c^3"
       " + 3 b^3 c^3 + a^2 c^4 + b^2 c^4",
    7: "2 a^4 b^3 + 2 a^3 b^4 + a^3 b^3 c + 7 a^3 b^2 c^2 + 7 a^2 b^3 c^2 + 2 a^4 c^3"
       " + a^3 b c^3 + 7 a^2 b^2 c^3 + a b^3 c^3 + 2 b^4 c^3 + 2 a^3 c^4 + 2 b^3 c^4",
}

# State equations of the four-stream example, rows/columns over the six
# non-zero (state, phase) nodes, entries as (stream letters, Z power).
FOUR_STREAM_F = [
    [None, None, None, None, ("", 0), None],
    [None, None, None, ("d", 1), None, ("c", 1)],
    [None, None, None, ("c", 1), None, ("d", 1)],
    [None, ("", 0), None, None, None, None],
    [("b", 1), None, ("a", 1), None, None, None],
    [("a", 1), None, ("b", 1), None, None, None],
]
FOUR_STREAM_T = [("cd", 2), None, None, ("ab", 2), None, None]
FOUR_STREAM_G = [None, ("ab", 2), None, None, ("cd", 2), None]
