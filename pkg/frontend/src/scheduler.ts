/** Debounced latest-wins request scheduling.
 *
 * Edits arrive faster than the network; the scheduler coalesces them over a
 * short debounce window, keeps at most one request in flight (superseded
 * requests are aborted), and discards stale responses by sequence number so
 * the screen always shows the most recent edit's result.
 */

export type Fetcher<Req, Res> = (req: Req, signal: AbortSignal) => Promise<Res>;

export const DEBOUNCE_MS = 50;

export class RequestScheduler<Req, Res> {
  private seq = 0;
  private renderedSeq = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pending: Req | null = null;
  private inFlight: AbortController | null = null;

  constructor(
    private readonly fetcher: Fetcher<Req, Res>,
    private readonly onResult: (res: Res, seq: number) => void,
    private readonly onError: (err: unknown) => void,
    private readonly debounceMs: number = DEBOUNCE_MS,
  ) {}

  /** Record an edit; the newest one is sent once the debounce window ends. */
  submit(req: Req): void {
    this.pending = req;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => this.flush(), this.debounceMs);
  }

  /** Highest sequence number applied so far (for tests and badges). */
  get lastRenderedSeq(): number {
    return this.renderedSeq;
  }

  private flush(): void {
    this.timer = null;
    if (this.pending === null) return;
    const req = this.pending;
    this.pending = null;

    if (this.inFlight !== null) this.inFlight.abort();
    const controller = new AbortController();
    this.inFlight = controller;
    const seq = ++this.seq;

    this.fetcher(req, controller.signal)
      .then((res) => {
        if (seq > this.renderedSeq) {
          this.renderedSeq = seq;
          this.onResult(res, seq);
        }
      })
      .catch((err) => {
        if (!controller.signal.aborted) this.onError(err);
      })
      .finally(() => {
        if (this.inFlight === controller) this.inFlight = null;
      });
  }
}
