/**
 * Request throttler for continuous drag interactions.
 *
 * Guarantees, per the backward-projection drag loop contract:
 *  - outgoing requests are spaced at least `minIntervalMs` apart;
 *  - at most one request is in flight; newer submissions supersede the
 *    queued payload rather than piling up;
 *  - responses superseded by a newer submission are dropped, so the last
 *    delivered response always corresponds to the final submission
 *    (lossless at rest).
 */
export class DragThrottler<Req, Res> {
  private pending: Req | null = null;
  private inFlight = false;
  private lastSentAt = -Infinity;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private sequence = 0;

  constructor(
    private readonly send: (req: Req) => Promise<Res>,
    private readonly deliver: (res: Res, req: Req) => void,
    private readonly minIntervalMs = 30,
    private readonly now: () => number = () => Date.now(),
    private readonly onError: (err: unknown) => void = () => undefined,
  ) {}

  /** Called on every drag tick with the latest desired payload. */
  submit(req: Req): void {
    this.pending = req;
    this.pump();
  }

  /** True while a request is in flight or queued. */
  get busy(): boolean {
    return this.inFlight || this.pending !== null;
  }

  private pump(): void {
    if (this.inFlight || this.pending === null) return;
    const wait = this.lastSentAt + this.minIntervalMs - this.now();
    if (wait > 0) {
      if (this.timer === null) {
        this.timer = setTimeout(() => {
          this.timer = null;
          this.pump();
        }, wait);
      }
      return;
    }
    const req = this.pending;
    this.pending = null;
    this.inFlight = true;
    this.lastSentAt = this.now();
    const token = ++this.sequence;
    this.send(req).then(
      (res) => {
        this.inFlight = false;
        // drop if a newer submission is already queued or was sent
        if (token === this.sequence && this.pending === null) {
          this.deliver(res, req);
        }
        this.pump();
      },
      (err) => {
        this.inFlight = false;
        this.onError(err);
        this.pump();
      },
    );
  }
}
