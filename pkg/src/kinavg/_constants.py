import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=None)
def load(name="constants.json"):
    with resources.files("kinavg.data").joinpath(name).open("r") as fh:
        return json.load(fh)
