import asyncio
from collections.abc import Callable, Iterable
from functools import partial
from typing import TypeVar

T = TypeVar("T")
A = TypeVar("A")


async def arun(func: Callable[..., T], *args, **kwargs) -> T:
    return await asyncio.get_running_loop().run_in_executor(None, partial(func, *args, **kwargs))


async def gather_map(func: Callable[..., T], items: Iterable[A], *args, **kwargs) -> list[T]:
    """`func(item, *args, **kwargs)` for every item, run concurrently in the default executor, in input order."""
    return list(await asyncio.gather(*(arun(func, item, *args, **kwargs) for item in items)))
