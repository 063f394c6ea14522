"""Pass/fail bookkeeping for the acceptance criteria."""

import functools

RESULTS: dict = {}


def criterion(number: int, title: str):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except BaseException as err:
                RESULTS[number] = (title, False, f"{type(err).__name__}: {err}".splitlines()[0][:160])
                print(line(number))
                raise
            RESULTS[number] = (title, True, detail or "")
            print(line(number))

        return wrapper

    return deco


def line(number: int) -> str:
    title, ok, detail = RESULTS[number]
    text = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
    return f"{text} [{detail}]" if detail else text


def lines() -> list:
    return [line(n) for n in sorted(RESULTS)]
