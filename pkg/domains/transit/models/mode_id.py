from enum import Enum


class ModeId(str, Enum):
    """Transport modes of the segment; declaration order is the draw order."""
    rer = "rer"
    metro = "metro"
    bus = "bus"
    taxi = "taxi"
    bike = "bike"
    walk = "walk"
