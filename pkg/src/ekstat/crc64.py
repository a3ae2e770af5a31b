"""CRC-64/XZ (ECMA-182 reflected) with a slice-by-8 table.

Used as the integrity trailer of the histogram cache format.  Reference
check value: crc64(b"123456789") == 0x995DC9BBDF1939FA.
"""

_POLY = 0xC96C5795D7870F42
_MASK = 0xFFFFFFFFFFFFFFFF


def _build_tables():
    tables = [[0] * 256 for _ in range(8)]
    for i in range(256):
        c = i
        for _ in range(8):
            c = (c >> 1) ^ (_POLY if c & 1 else 0)
        tables[0][i] = c
    for i in range(256):
        c = tables[0][i]
        for s in range(1, 8):
            c = tables[0][c & 0xFF] ^ (c >> 8)
            tables[s][i] = c
    return tables


_TABLES = _build_tables()


def crc64(data: bytes, crc: int = 0) -> int:
    """Return the CRC-64/XZ of `data`, optionally chained from a prior value."""
    t0, t1, t2, t3, t4, t5, t6, t7 = _TABLES
    crc ^= _MASK
    view = memoryview(data)
    n = len(view)
    i = 0
    while n - i >= 8:
        crc ^= int.from_bytes(view[i:i + 8], "little")
        crc = (t7[crc & 0xFF]
               ^ t6[(crc >> 8) & 0xFF]
               ^ t5[(crc >> 16) & 0xFF]
               ^ t4[(crc >> 24) & 0xFF]
               ^ t3[(crc >> 32) & 0xFF]
               ^ t2[(crc >> 40) & 0xFF]
               ^ t1[(crc >> 48) & 0xFF]
               ^ t0[(crc >> 56) & 0xFF])
        i += 8
    while i < n:
        crc = t0[(crc ^ view[i]) & 0xFF] ^ (crc >> 8)
        i += 1
    return crc ^ _MASK
