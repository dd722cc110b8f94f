from pydantic import BaseModel


class FrozenModel(BaseModel):
    class Config:
        allow_mutation = False
        frozen = True
        arbitrary_types_allowed = True
