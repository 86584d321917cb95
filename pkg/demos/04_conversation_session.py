"""
A bidirectional conversation with the mock interpreter
======================================================

Drive a live session through speed-ups, a landmark-scoped change, an undo, a
clarification exchange, and a stop, printing the transcript and the event
log. The mock backend is a fixed keyword grammar (docs/mock-grammar.md), so
this runs fully offline and deterministically.
"""

from pathlib import Path

from trajtalk import MockBackend, load_landmarks, load_trajectory, start

DATA = Path(__file__).resolve().parent.parent / "data"

traj = load_trajectory(DATA / "feeding_trajectory.yaml")
body = load_landmarks(DATA / "landmarks.yaml")
session = start(traj, body, "bidirectional", MockBackend())

script = [
    "go faster",
    "a little faster",
    "softer around my mouth",
    "undo that",
    "this doesn't feel right",   # unclear -> clarifying question
    "closer to my mouth",        # the answer resolves it
    "stop",
]

for text in script:
    session.tick(1.0)
    outcome = session.submit_utterance(text)
    print(f"  user:  {text}")
    if outcome.feedback:
        print(f"  robot: {outcome.feedback}")
    print(f"         [modified={outcome.modified}, phase={session.phase.value}]")

print("\nvelocities:", " ".join(f"{w.vel:.3f}" for w in session.current.waypoints))
print("original:  ", " ".join(f"{w.vel:.3f}" for w in session.original.waypoints))

print("\nevent log:")
for event in session.events:
    print(f"  #{event.seq:<2} p={event.progress:.3f} {event.kind:<12} "
          f"{event.payload.get('text', event.payload.get('reason', ''))}")

stats = session.latency()
print(f"\nmean interpret latency with the mock: {stats.mean_interpret_s * 1e3:.2f} ms "
      f"over {stats.count} modifications")
