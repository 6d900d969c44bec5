"""
Example usage of the MPST Partial Checker
"""

from pathlib import Path

from src.mpst.engine import SessionEngine
from src.mpst.reports import render_text
from src.mpst.verifier import Bounds, Property

CORPUS = Path(__file__).resolve().parent / "corpus"


def main():
    """Example usage"""
    print("=" * 60)
    print("MPST Partial Checker - Example")
    print("=" * 60)

    engine = SessionEngine(bounds=Bounds(40, 2))
    module = engine.load(path=CORPUS / "social_media.mps")
    print("\nLoaded social_media.mps")

    # Example 1: the users are typed
    print("\nExample 1: check for {u1, u2}")
    report = engine.check(module, "G", "SocialMedia", "Users")
    print(render_text(report))

    # Example 2: the service is not
    print("Example 2: check for {u1, u2, s}")
    report = engine.check(module, "G", "SocialMedia", "Everyone")
    print(render_text(report))

    # Example 3: the verifier finds the locked service
    print("Example 3: lock-freedom of s")
    report = engine.verify(module, "SocialMedia", "s", Property.LOCK)
    print(render_text(report))

    # Example 4: boundedness
    print("Example 4: depth table of the boundedness example")
    report = engine.analyze(engine.load(path=CORPUS / "boundedness.mps"), "G", "Pending")
    print(render_text(report))

    print("=" * 60)
    print("Example completed!")
    print("=" * 60)


if __name__ == "__main__":
    main()
