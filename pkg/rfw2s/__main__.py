from rfw2s.cli import main

raise SystemExit(main())
