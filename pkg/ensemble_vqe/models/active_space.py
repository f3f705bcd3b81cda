from typing import List
from pydantic import BaseModel, Field, validator

class ActiveSpaceSpec(BaseModel):
    """Partition of spatial orbitals into frozen (doubly occupied) and active ones."""
    frozen: List[int] = Field(default_factory=list, description="Frozen spatial-orbital indices (0-based)")
    active: List[int] = Field(..., description="Active spatial-orbital indices (0-based)")
    active_electrons: int = Field(..., ge=0, description="Electrons distributed over the active orbitals")

    @validator('frozen', 'active')
    def validate_indices(cls, v):
        if any(i < 0 for i in v):
            raise ValueError("Orbital indices must be non-negative")
        if len(set(v)) != len(v):
            raise ValueError("Orbital indices must be unique")
        return sorted(v)

    @validator('active')
    def validate_disjoint(cls, v, values):
        overlap = set(v) & set(values.get('frozen', []))
        if overlap:
            raise ValueError(f"Orbitals {sorted(overlap)} are both frozen and active")
        return v

    @validator('active_electrons')
    def validate_electrons(cls, v, values):
        if v % 2:
            raise ValueError("Active electron count must be even")
        active = values.get('active')
        if active is not None and v > 2 * len(active):
            raise ValueError(f"{v} electrons do not fit in {len(active)} active orbitals")
        return v

    @property
    def spin_orbital_count(self) -> int:
        return 2 * len(self.active)

    class Config:
        allow_mutation = False
        schema_extra = {
            "example": {
                "frozen": [0, 1, 2, 3, 4],
                "active": [5, 6, 7],
                "active_electrons": 4,
            }
        }
